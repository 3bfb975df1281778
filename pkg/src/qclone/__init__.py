"""Universal asymmetric 1->2 quantum cloning: Choi states, CP criteria, the
optimal cloner and the single-clone quality tradeoff regions."""

__version__ = "0.1.0"
