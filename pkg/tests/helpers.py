from qadicmm.fieldcore import PrimeModulus
from qadicmm.plan import CompressionPlan, kmax_for


def make_plan(p, t, e, beta=53, additive=False):
    """A plan with explicit Q = 2**t and e slots, bypassing the planner."""
    m = PrimeModulus(p)
    return CompressionPlan(modulus=m, t=t, d=e - 1, e=e, beta=beta,
                           kmax=kmax_for(m, t), e_raw=(beta - 1) // t,
                           additive=additive)


def poly_mul(a, b):
    """Schoolbook product of coefficient lists (lowest degree first)."""
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def eval_at(coeffs, q):
    return sum(c * q**i for i, c in enumerate(coeffs))
