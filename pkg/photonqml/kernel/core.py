import logging

import numpy as np
from dask.distributed import as_completed

logger = logging.getLogger(__name__)


def cell_seed(master_seed: int, *coordinates: int) -> np.random.SeedSequence:
    """Derive the seed of one sweep cell from its coordinates.

    Seeds depend only on the master seed and the cell, never on the
    order in which cells run.
    """
    return np.random.SeedSequence([int(master_seed), *(int(c) for c in coordinates)])


def run_cells(function, cells: list, client=None) -> list:
    """Evaluate a function over independent sweep cells.

    Args:
        function: Pure function of the cell's keyword arguments.
        cells: Keyword arguments per cell.
        client (distributed.Client): Submit cells to this client. Cells
            run in process when not given.

    Returns:
        Results in the order of ``cells``.
    """
    if client is None:
        return [function(**cell) for cell in cells]

    futures = {}
    for position, cell in enumerate(cells):
        futures[client.submit(function, pure=False, **cell)] = position
    logger.info("Submitted %d cells", len(cells))

    results = [None] * len(cells)
    for future in as_completed(list(futures)):
        results[futures[future]] = future.result()

    return results


def derive_seed(master_seed: int, *coordinates: int) -> int:
    """Get a plain integer seed for one cell, for serialisable specs."""
    return int(cell_seed(master_seed, *coordinates).generate_state(1)[0])
