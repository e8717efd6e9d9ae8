"""Shared fixtures-as-constants for the test suite."""
from ladderwalk import EnvLaw, Environment, SiteLaw

# the five homogeneous regression rows (q2, q1, p1, p2) and the reference
# mean ladder heights they must reproduce
ROW1 = SiteLaw(q2=0.08, q1=0.36, p1=0.21, p2=0.35)
ROW2 = SiteLaw(q2=0.19, q1=0.30, p1=0.30, p2=0.21)
ROW3 = SiteLaw(q2=0.3199, q1=0.1801, p1=0.1789, p2=0.3211)
ROW4 = SiteLaw(q2=0.0001, q1=0.4999, p1=0.4998, p2=0.0002)
ROW5 = SiteLaw(q2=0.1372, q1=0.3628, p1=0.3627, p2=0.1373)

ROWS = (ROW1, ROW2, ROW3, ROW4, ROW5)
EXIT_MEANS = (1.467727692, 1.323718710, 1.481684406, 1.000399840,
              1.226490265)

NEGATIVE_DRIFT = SiteLaw(q2=0.35, q1=0.21, p1=0.36, p2=0.08)

#: tight clamped-Dirichlet law concentrated near ROW1 (positive drift a.s.)
DIRICHLET_ALPHA = (512.0, 2304.0, 1344.0, 2240.0)


def periodic_env() -> Environment:
    return Environment.periodic([ROW1, ROW2])


def iid_env(seed: int = 999) -> Environment:
    return Environment.iid(EnvLaw("dirichlet", alpha=DIRICHLET_ALPHA), seed)
