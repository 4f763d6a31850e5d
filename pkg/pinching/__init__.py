"""
Pinching
========

Spectral efficiency of multi-user downlinks served by pinching antennas:
small dielectric particles clamped onto waveguides that radiate the guided
signal wherever they are placed.

The package compares a centralized deployment (all antennas on one
waveguide, users served in turn) with a distributed one (one antenna per
waveguide, all users at once) under MRT and ZF beamforming, evaluates the
stationary-phase approximation of the inter-user interference against
quadrature, and sweeps the scenarios behind the usual trade-off curves.

Example Usage
-------------

.. code-block:: python

    >>> import pinching
    >>> cfg = pinching.SystemConfig(n=5, d=2.0).with_pt_dbm(20)
    >>> drop = pinching.sample_users(cfg, seed=7, worst_case_y=True)
    >>> pinching.se_distributed(drop, cfg, pinching.Scheme.ZF).total_se
    >>> pinching.se_centralized_exact(drop, cfg).total_se

From the command line:

.. code-block:: console

    $ pinching sweep --figure approx-vs-sim --seed 7 --out approx.csv
    $ pinching se --strategy centralized --pt-dbm 0

For full usage see the docs.
"""

__version__ = "0.1.0"

from . import errors
from . import model
from . import channel
from . import placement
from . import beamforming
from . import stationary
from . import metrics
from . import asymptotics
from . import oracle
from . import experiments
from .errors import *
from .model import *
from .channel import *
from .placement import *
from .beamforming import *
from .stationary import *
from .metrics import *
from .asymptotics import *
from .oracle import *
from .experiments import *

__all__ = [
    *errors.__all__,
    *model.__all__,
    *channel.__all__,
    *placement.__all__,
    *beamforming.__all__,
    *stationary.__all__,
    *metrics.__all__,
    *asymptotics.__all__,
    *oracle.__all__,
    *experiments.__all__,
]
