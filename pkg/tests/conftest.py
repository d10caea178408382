import numpy as np
import pytest

import targetzone as tz

HKD_LO, HKD_HI = 7.75, 7.85


@pytest.fixture(scope="session")
def band():
    return tz.Band(0.0, 1.0)


@pytest.fixture(scope="session")
def cos_model(band):
    s_mid, gamma = tz.fit_cos_band(HKD_LO, HKD_HI)
    return tz.build_cos_model(s_mid, gamma, band, 0.1)


@pytest.fixture(scope="session")
def tan_model(band):
    s_mid, gamma = tz.fit_tan_band(HKD_LO, HKD_HI, 2.0, band)
    return tz.build_tan_model(s_mid, gamma, 2.0, band, 0.1)


@pytest.fixture(scope="session")
def quartic_model(band):
    return tz.build_quartic_model(0.1, HKD_LO, band, 0.1)


@pytest.fixture(scope="session")
def eig_cos(cos_model):
    return cos_model.eigensystem(64)


@pytest.fixture(scope="session")
def eig_tan(tan_model):
    return tan_model.eigensystem(64)


@pytest.fixture(scope="session")
def eig_quartic(quartic_model):
    return quartic_model.eigensystem(16)


def count_nodes(values: np.ndarray) -> int:
    trimmed = values[np.abs(values) > 1e-8 * np.max(np.abs(values))]
    return int(np.sum(trimmed[1:] * trimmed[:-1] < 0))
