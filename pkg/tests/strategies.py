from hypothesis import strategies as st

from ncgeo.infrastructure.algebras import FiniteAlgebra
from ncgeo.infrastructure.exactlin import IMAG, scalar

small_ints = st.integers(min_value=-3, max_value=3)


def elements(A: FiniteAlgebra):
    """Elements of A with small integer coefficients."""
    return st.lists(small_ints, min_size=A.dim, max_size=A.dim).map(A.element)


def gaussian_scalars():
    return st.builds(lambda x, y: scalar(x) + scalar(y) * IMAG, small_ints, small_ints)
