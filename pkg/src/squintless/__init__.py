"""Gridless 2D angle estimation with multi-frequency atomic norms.

Modules: ``model`` (signal model), ``kernels`` (interpolation kernels),
``certificate`` (dual certificates), ``solver`` (SDP and ADMM),
``recovery`` (angle extraction), ``oracle`` (reference checks), ``cli``.
"""
__version__ = "0.1.0"
