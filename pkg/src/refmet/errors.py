"""Exception types shared across the package."""


class RefmetError(ValueError):
    """Base class for all domain errors raised by refmet."""


class FormatError(RefmetError):
    """Malformed or unsupported image file content."""


class ShapeMismatchError(RefmetError):
    """Two grids that must be congruent have different dims."""


class DegenerateRangeError(RefmetError):
    """An operation hit a zero-width intensity range (constant image)."""


class NonRectangularMaskError(RefmetError):
    """A windowed metric was asked to evaluate a non-rectangular mask.

    Windowed metrics (ssim, ms_ssim, cw_ssim) combine neighboring pixels
    and only support masks that are exactly a filled rectangle, which are
    evaluated by cropping both images to that rectangle.
    """


class ConfigError(RefmetError):
    """Invalid harness/CLI configuration."""
