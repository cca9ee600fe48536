"""deftqft: computable 3-dimensional defect TQFTs.

Core layers:

* defect label data and the derived computad (:mod:`deftqft.defects`),
* G-graded spherical fusion categories with a planar graph evaluator
  (:mod:`deftqft.fusion`),
* combinatorial stratified surfaces and bordisms (:mod:`deftqft.strata`),
* the trivial-extension and state-sum TQFT engines (:mod:`deftqft.engines`),
* the Gray category with duals extracted from either engine
  (:mod:`deftqft.gray`),
* a FastAPI service exposing every operation (:mod:`deftqft.service`) with
  the command line as a thin client (:mod:`deftqft.cli`).
"""

__version__ = "0.1.0"
