import numpy as np
import pytest

import thermident as th
from thermident.dataset import STEPS_PER_DAY, STEPS_PER_WEEK


@pytest.fixture(scope="session")
def twin_desc():
    return th.twin_description()


@pytest.fixture(scope="session")
def twin_gamma():
    return th.twin_true_parameters()


@pytest.fixture(scope="session")
def twin_model(twin_desc, twin_gamma):
    return th.build_thermal_model(twin_desc, twin_gamma)


@pytest.fixture(scope="session")
def twin_dm(twin_model):
    return th.discretize(twin_model, 900.0)


@pytest.fixture(scope="session")
def toy_desc():
    from thermident.twin import toy_description

    return toy_description()


@pytest.fixture(scope="session")
def toy_gamma():
    from thermident.twin import toy_parameters

    return toy_parameters()


@pytest.fixture(scope="session")
def toy_dm(toy_desc, toy_gamma):
    return th.build_discrete_model(toy_desc, toy_gamma)


@pytest.fixture(scope="session")
def weekend_ds(twin_desc, twin_gamma):
    """Noiseless excitation weekend with the default (weekend-attenuated) gains."""
    return th.synthesize_weekend_experiment(twin_desc, twin_gamma, "2015-03-07", seed=42)


@pytest.fixture(scope="session")
def weeks10_ds(twin_desc, twin_gamma):
    """Ten regular-operation weeks with measurement noise (shared across tests)."""
    from thermident.synth import NoiseConfig

    return th.synthesize_weeks(
        twin_desc, twin_gamma, "2015-04-06", weeks=10, seed=11,
        noise=NoiseConfig(meas_std=0.03),
    )


def week_slice(ds, w):
    """Week w of a multi-week dataset, with the preceding day as warm-up."""
    start = ds.warmup_steps + w * STEPS_PER_WEEK - STEPS_PER_DAY
    stop = ds.warmup_steps + (w + 1) * STEPS_PER_WEEK
    return ds.window(start, stop, warmup_steps=STEPS_PER_DAY)
