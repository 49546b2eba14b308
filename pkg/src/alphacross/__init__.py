"""Combining alpha streams with internal trade crossing.

Submodules:

* :mod:`alphacross.blotter` - exact cent-level crossing of trade blotters
* :mod:`alphacross.analytic` - closed-form turnover and netting results
* :mod:`alphacross.simulate` - Monte Carlo tournament over correlated streams
* :mod:`alphacross.correlations` - correlation estimates and quantile bounds
* :mod:`alphacross.cli` - command line entry point
"""

__version__ = "0.1.0"
