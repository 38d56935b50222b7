"""Process-wide defaults.

The values are plain module attributes so tests and the CLI can read them;
functions take explicit overrides instead of mutating them.
"""
import os

#: Largest state space a Markov chain constructor accepts.
STATE_CAP = 10**5

#: Chains up to this many states are diagonalised densely.
DENSE_EIG_THRESHOLD = 2_000

#: Hard ceiling on the dimension of any simulated Hilbert space.
DIM_CAP = 2**22

#: Multiplicative constant of the detection query budget.
BUDGET_CONSTANT = 30.0

#: Repetition constant for majority-vote boosting, k = ceil(C * ln(1/eps)).
BOOST_CONSTANT = 18


def dim_cap():
    """Dimension ceiling, honouring the ``NESTEDWALK_CAP`` environment variable."""
    env = os.environ.get("NESTEDWALK_CAP")
    if env:
        return int(env)
    return DIM_CAP
