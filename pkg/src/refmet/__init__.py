"""refmet: full-reference image similarity with explicit semantics.

Core pieces:

* :mod:`refmet.image` - image/mask types, PGM and rawf32 I/O
* :mod:`refmet.normalize` - minmax/zscore/custom normalization, binning,
  data-range policies for the L parameter
* :mod:`refmet.metrics` - mae, mse, psnr, ssim, ms_ssim, cw_ssim, pcc,
  mi, nmi, dice, plus masked/cropped evaluation
* :mod:`refmet.distort` - deterministic seeded distortions
* :mod:`refmet.downstream` - proxy segmentation task similarity
* :mod:`refmet.phantom` / :mod:`refmet.harness` - synthetic phantoms and
  the five built-in metric-pitfall audit scenarios
* :mod:`refmet.cli` - compare / distort / phantom / audit / lint commands
"""

__version__ = "0.1.0"
