"""Provides shared fixtures and methods for tests.

Use these to replace duplicated code.

For generating objects within a test function's scope, call a fixture
directly:

    .. code-block:: python

        def test_foobar(self, conftest_mock_ansatz):
            ansatz = conftest_mock_ansatz
            unitary = trainable_unitary(ansatz, theta)
            ...
"""

from itertools import permutations
from types import ModuleType
from typing import Any
from unittest.mock import patch

import numpy as np
import pytest

from photonqml.kernel.fock import FockBasis, enumerate_basis
from photonqml.modules.ansatz import CircuitAnsatz, build_ansatz
from photonqml.modules.mesh import haar_random_unitary
from photonqml.utilities.vowels.vowel_dataset import VowelDataset, synth_dataset


# Function patches
@pytest.fixture(scope="function", autouse=False)
def conftest_mock_check_directory_exists():
    """Override checks when mocking directories."""

    patcher = patch("pathlib.Path.is_dir")
    mock_exists = patcher.start()
    mock_exists.return_value = True
    yield mock_exists
    patcher.stop()


@pytest.fixture(name="conftest_rng_seed", scope="function", autouse=False)
def fixture_conftest_rng_seed():
    """Set seed for random number generator to 444.

    Returns:
        np.random.Generator: Random number generator with seed=444.
    """

    random_generator = np.random.default_rng(seed=444)
    assert isinstance(random_generator, np.random.Generator)

    yield random_generator


@pytest.fixture(name="conftest_mock_basis", scope="function", autouse=False)
def fixture_conftest_mock_basis():
    """Constructs the basis of two photons in four modes.

    Returns:
        Generator[FockBasis]: Basis with ten states.
    """

    basis = enumerate_basis(4, 2)
    assert isinstance(basis, FockBasis)
    assert basis.dim == 10

    yield basis


@pytest.fixture(name="conftest_mock_unitary", scope="function", autouse=False)
def fixture_conftest_mock_unitary():
    """Constructs a Haar-random four-mode unitary with fixed seed.

    Returns:
        Generator[np.ndarray]: 4 x 4 unitary.
    """

    unitary = haar_random_unitary(4, 444)
    assert np.allclose(unitary.conj().T @ unitary, np.eye(4), atol=1e-12)

    yield unitary


@pytest.fixture(name="conftest_mock_ansatz", scope="function", autouse=False)
def fixture_conftest_mock_ansatz():
    """Constructs a one-layer ansatz on four modes with two photons.

    .. note:: Use with caution, as this fixture assumes CircuitAnsatz
        objects are correctly instantiated.

    Returns:
        Generator[CircuitAnsatz]: Ansatz with all K=12 body phases
        trainable and a fixed encoder.
    """

    ansatz = build_ansatz(4, 2)
    assert isinstance(ansatz, CircuitAnsatz)
    assert ansatz.K == 12

    yield ansatz


@pytest.fixture(name="conftest_mock_theta", scope="function", autouse=False)
def fixture_conftest_mock_theta(
    conftest_mock_ansatz: CircuitAnsatz, conftest_rng_seed: np.random.Generator
):
    """Draws uniform parameters for the mock ansatz."""

    theta = conftest_rng_seed.uniform(0.0, 2 * np.pi, conftest_mock_ansatz.K)
    assert theta.shape == (conftest_mock_ansatz.K,)

    yield theta


@pytest.fixture(name="conftest_mock_dataset", scope="function", autouse=False)
def fixture_conftest_mock_dataset():
    """Constructs a small synthetic vowel dataset.

    Returns:
        Generator[VowelDataset]: Seven classes with ten samples each.
    """

    dataset = synth_dataset(per_class=10, separation=3.0, seed=444)
    assert isinstance(dataset, VowelDataset)
    assert dataset.size == 70

    yield dataset


class TestBoilerplate:
    """Provides boilerplate methods for serialising tests.

    The class is instantiated via the `conftest_boilerplate` fixture.
    The fixture is autoused, and can be called directly within a test::

    ..code-block:: python

        def test_foo(self, conftest_boilerplate):

            foobar = [...]
            conftest_boilerplate.bar(foobar)

    Methods are arranged with their appropriate test::

    .. code-block:: python

        def foo(self, ...):
            pass

        def test_foo(self ...):
            pass
    """

    def check_output(self, variable: Any, x_type: Any, x_value: Any) -> bool:
        """Check a variable matches an expected type and value.

        Args:
            variable: Variable to check.
            x_type: Expected variable type.
            x_value: Expected variable value.

        Returns:
            True when all assertions pass.
        """

        assert isinstance(variable, x_type)
        if np.issubdtype(type(variable), np.number):
            assert np.isclose(variable, x_value)
        else:
            assert variable == x_value

        return True

    def test_check_output(self):
        variable_list = [[1.0, float], ["test", str], [1, int], [True, bool]]

        for pair in variable_list:
            assert self.check_output(
                variable=pair[0], x_type=pair[1], x_value=pair[0]
            )

    def naive_permanent(self, matrix: np.ndarray) -> complex:
        """Get the permanent by summing over all permutations."""
        size = matrix.shape[0]
        total = 0.0 + 0.0j
        for sigma in permutations(range(size)):
            product = 1.0 + 0.0j
            for row, column in enumerate(sigma):
                product *= matrix[row, column]
            total += product

        return total

    def test_naive_permanent(self):
        assert self.naive_permanent(np.ones((3, 3))) == pytest.approx(6.0)
        assert self.naive_permanent(np.eye(4)) == pytest.approx(1.0)
        assert self.naive_permanent(np.array([[1.0, 2.0], [3.0, 4.0]])) == pytest.approx(10.0)

    def check_unitary(self, matrix: np.ndarray, tolerance: float = 1e-10) -> bool:
        """Assert a matrix is square and unitary."""
        assert matrix.ndim == 2
        assert matrix.shape[0] == matrix.shape[1]
        identity = np.eye(matrix.shape[0])
        assert np.max(np.abs(matrix.conj().T @ matrix - identity)) < tolerance

        return True

    def test_check_unitary(self):
        assert self.check_unitary(haar_random_unitary(3, 0))
        with pytest.raises(AssertionError):
            self.check_unitary(2 * np.eye(3))

    def finite_difference(self, function, x: np.ndarray, step: float = 1e-6) -> np.ndarray:
        """Get the central finite-difference gradient of a scalar function."""
        gradient = np.zeros(len(x))
        for i in range(len(x)):
            shift = np.zeros(len(x))
            shift[i] = step
            gradient[i] = (function(x + shift) - function(x - shift)) / (2 * step)

        return gradient

    def test_finite_difference(self):
        x = np.array([1.0, -2.0, 0.5])
        gradient = self.finite_difference(lambda y: np.sum(y**2), x)
        assert np.allclose(gradient, 2 * x, atol=1e-6)

    def patch_variable(
        self,
        monkeypatch: pytest.MonkeyPatch,
        module: ModuleType,
        new_params: dict,
    ):
        """Patch any variable in a module.

        Patch the module or class the variable is read from at call
        time. The patched variable only exists within the test
        function's scope, so test parametrisation is still supported.

        Example:
            To patch the derivative method used by the DQFIM:

                .. code-block:: python

                    patches = {"dqfim_method": "lifted"}
                    conftest_boilerplate.patch_variable(
                        monkeypatch,
                        photonqml.constants.Constants,
                        patches,
                        )

        Args:
            monkeypatch: Monkeypatch instance.
            module: Target module or class for patching.
            new_params: Variable names as keys, desired patched values as values.
        """

        if not isinstance(new_params, dict):
            note = "Pass dict with variable names and patched values as items."
            raise TypeError(note)
        for key in new_params:
            monkeypatch.setattr(module, key, new_params[key])

    @pytest.fixture(scope="class", autouse=False)
    def test_boilerplate_integration(self):
        """Integration test for boilerplate methods."""

        self.test_check_output()
        self.test_naive_permanent()
        self.test_check_unitary()
        self.test_finite_difference()


@pytest.fixture(name="conftest_boilerplate", scope="function", autouse=False)
def conftest_boilerplate():
    """Yields class containing methods for common tests."""

    test_boilerplate = TestBoilerplate()
    assert isinstance(test_boilerplate, TestBoilerplate)

    yield test_boilerplate
