"""Seam-guided grasp selection and fold-stack garment simulation.

Subpackages and modules:

codec
    Oriented bounding-box encoding of straight seam line segments,
    including augmentation recategorization.
fusion
    Merging of two crossing-detector outputs into one capped candidate set.
policy
    Decision matrices over seam-type combinations and grasp-pair selection.
metrics
    Coverage / IoU metrics, per-step aggregation, success rates.
sim
    Deterministic 2D fold-stack T-shirt simulator.
harness
    Closed-loop experiment runner and report generation.
"""

__version__ = "0.1.0"
