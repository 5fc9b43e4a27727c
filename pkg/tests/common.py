import sys
from contextlib import contextmanager

import numpy as np

# Covariance of the bivariate in-control process of the multivariate ARL tables
sigma_bivariate = np.array([[1., 0.3], [0.3, 1.2]])


@contextmanager
def stdout_redirector(stream):
    old_stdout = sys.stdout
    sys.stdout = stream
    try:
        yield
    finally:
        sys.stdout = old_stdout


def normal_subgroups(rng, m, n, p=1, mean=0., cov=None):
    """Array (m, n, p) of normal subgroups."""
    cov = np.eye(p) if cov is None else np.asarray(cov)
    x = rng.multivariate_normal(np.broadcast_to(mean, (p,)), cov, size=(m, n))
    return x.reshape(m, n, p)


def write_dataset(path, subgroups, names=None):
    from robustspc.input import dataset_columns
    dataset_columns(np.asarray(subgroups), names).to_csv(path, index=False)
    return str(path)
