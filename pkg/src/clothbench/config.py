"""Environment specifications: named presets, JSON round-trip, config hash.

The benchmark ships three variants of the towel environment:

* ``towels``          cluster grasping with misgrasp chances, same colour on
                      both fabric faces (the realistic benchmark).
* ``towels-nomiss``   same, with misgrasping disabled (the easier variant
                      used to show the no-misgrasp monotonicity).
* ``towels-ideal``    idealised legacy setting: precise single-particle
                      grasps, no misgrasping, distinct face colours.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field

from .errors import ValidationError
from .sim.env import PickPlaceEnv
from .sim.params import ClothParams, GraspConfig, GraspMode
from .sim.state import DEFAULT_BACK_COLOR, DEFAULT_FACE_COLOR
from .vision.camera import Camera
from .vision.depth import DepthMode, MaskMode, VisionConfig
from .vision.render import BACKGROUND_COLOR


@dataclass(frozen=True)
class EnvSpec:
    name: str = "towels"
    cloth: ClothParams = field(default_factory=ClothParams)
    grasp: GraspConfig = field(default_factory=GraspConfig)
    camera: Camera = field(default_factory=Camera)
    vision: VisionConfig = field(default_factory=VisionConfig)
    distinct_faces: bool = False
    background: tuple = BACKGROUND_COLOR

    def validate(self) -> "EnvSpec":
        self.cloth.validate()
        self.grasp.validate()
        self.camera.validate()
        self.vision.validate()
        return self

    def make_env(self) -> PickPlaceEnv:
        return PickPlaceEnv(
            self.cloth, self.grasp, self.camera, self.vision, self.background
        )

    def face_colors(self):
        if self.distinct_faces:
            return (DEFAULT_FACE_COLOR, DEFAULT_BACK_COLOR)
        return (DEFAULT_FACE_COLOR, DEFAULT_FACE_COLOR)

    # ------------------------------------------------------------- codecs

    def to_dict(self) -> dict:
        doc = dataclasses.asdict(self)
        doc["grasp"]["mode"] = self.grasp.mode.value
        doc["vision"]["mask_mode"] = self.vision.mask_mode.value
        doc["vision"]["depth_mode"] = self.vision.depth_mode.value
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "EnvSpec":
        doc = dict(doc)
        cloth = ClothParams(**doc.pop("cloth", {}))
        grasp_doc = dict(doc.pop("grasp", {}))
        if "mode" in grasp_doc:
            grasp_doc["mode"] = GraspMode(grasp_doc["mode"])
        grasp = GraspConfig(**grasp_doc)
        camera = Camera(**doc.pop("camera", {}))
        vis_doc = dict(doc.pop("vision", {}))
        if "mask_mode" in vis_doc:
            vis_doc["mask_mode"] = MaskMode(vis_doc["mask_mode"])
        if "depth_mode" in vis_doc:
            vis_doc["depth_mode"] = DepthMode(vis_doc["depth_mode"])
        for key in ("fabric_hue", "fabric_sat", "fabric_val",
                    "background_hue", "background_sat", "background_val"):
            if key in vis_doc:
                vis_doc[key] = tuple(vis_doc[key])
        vision = VisionConfig(**vis_doc)
        background = tuple(doc.pop("background", BACKGROUND_COLOR))
        return cls(
            name=doc.pop("name", "custom"),
            cloth=cloth,
            grasp=grasp,
            camera=camera,
            vision=vision,
            distinct_faces=doc.pop("distinct_faces", False),
            background=background,
        ).validate()

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)

    def config_hash(self) -> str:
        return hashlib.sha256(
            json.dumps(self.to_dict(), sort_keys=True).encode()
        ).hexdigest()[:16]


def preset(name: str) -> EnvSpec:
    base = EnvSpec()
    if name == "towels":
        return base
    if name == "towels-nomiss":
        return dataclasses.replace(
            base, name=name, grasp=base.grasp.replace(misgrasp_prob=0.0)
        )
    if name == "towels-ideal":
        return dataclasses.replace(
            base,
            name=name,
            grasp=base.grasp.replace(misgrasp_prob=0.0, mode=GraspMode.PRECISE),
            distinct_faces=True,
        )
    raise ValidationError("env", f"unknown environment preset: {name}")


PRESET_NAMES = ("towels", "towels-nomiss", "towels-ideal")


def load_env_spec(name_or_path: str) -> EnvSpec:
    """Resolve a preset name or a JSON file path into an EnvSpec."""
    if name_or_path in PRESET_NAMES:
        return preset(name_or_path)
    with open(name_or_path) as f:
        return EnvSpec.from_dict(json.load(f))
