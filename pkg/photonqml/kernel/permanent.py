import numpy as np
from numba import njit


@njit
def permanent_ryser(matrix: np.ndarray) -> complex:
    """Compute a matrix permanent with Ryser's formula.

    Subsets of columns are visited in Gray-code order so each step adds
    or removes a single column from the running row sums, giving
    O(2^k * k) operations.

    Args:
        matrix: Square complex matrix.

    Returns:
        Permanent of the matrix. The empty matrix has permanent 1.
    """

    k = matrix.shape[0]
    if k == 0:
        return 1.0 + 0.0j

    row_sums = np.zeros(k, dtype=np.complex128)
    total = 0.0 + 0.0j
    gray = 0
    subset_size = 0
    for step in range(1, 2**k):
        # Column to toggle is the lowest set bit of the step
        column = 0
        bits = step
        while bits & 1 == 0:
            bits >>= 1
            column += 1

        if (gray >> column) & 1:
            for i in range(k):
                row_sums[i] -= matrix[i, column]
            subset_size -= 1
        else:
            for i in range(k):
                row_sums[i] += matrix[i, column]
            subset_size += 1
        gray ^= 1 << column

        product = 1.0 + 0.0j
        for i in range(k):
            product *= row_sums[i]
        if (k - subset_size) % 2 == 0:
            total += product
        else:
            total -= product

    return total


def permanent(matrix: np.ndarray) -> complex:
    """Get the permanent of a square matrix.

    Raises:
        ValueError: Matrix is not square.
    """
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"Permanent needs a square matrix, got shape {matrix.shape}")

    return complex(
        permanent_ryser(np.ascontiguousarray(matrix, dtype=np.complex128))
    )
