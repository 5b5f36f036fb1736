from .base import IdentityTransform, PresentationTransform, TransformResult
from .power import PowerTransform
from .collar import CollarTransform

# Transform registry
AVAILABLE_TRANSFORMS = {
    "identity": IdentityTransform,
    "power": PowerTransform,
    "collar": CollarTransform,
}


def create_transform(transform_type: str, config: dict = None) -> PresentationTransform:
    """Factory function to create transform instances"""
    if transform_type not in AVAILABLE_TRANSFORMS:
        raise ValueError(f"Unknown transform type: {transform_type}")

    return AVAILABLE_TRANSFORMS[transform_type](config or {})
