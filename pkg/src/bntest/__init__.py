"""Sample-efficient identity and closeness testers for product distributions
and Bayes nets over {0,1}^n."""
from . import core, errors
from .core import BayesNet, DagStructure, ProductSpec, SampleBatch, sample

__version__ = "0.1.0"
