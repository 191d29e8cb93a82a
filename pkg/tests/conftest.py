import pytest

from ipobisim.bisim import BisimulationGame
from ipobisim.config import load_settings
from ipobisim.ipo import Config, LabelSet, Order
from ipobisim.oracles import OMEGA_CL
from ipobisim.reduction import Calculus, Strategy
from ipobisim.syntax import parse_term

FUEL = 200


# ------------------------------------------------------------------
#                          SESSION SCOPED
# ------------------------------------------------------------------
@pytest.fixture(scope="session")
def settings():
    return load_settings(environ={})


@pytest.fixture(scope="session")
def lazy_finite():
    return Config(Calculus.CLSTAR, Order.SECOND, Strategy.LAZY, LabelSet.FINITE)


@pytest.fixture(scope="session")
def lazy_reactive():
    return Config(Calculus.CLSTAR, Order.SECOND, Strategy.LAZY, LabelSet.REACTIVE_ONLY)


@pytest.fixture(scope="session")
def lazy_all():
    return Config(Calculus.CLSTAR, Order.SECOND, Strategy.LAZY, LabelSet.ALL_IPO)


@pytest.fixture(scope="session")
def cbv_reactive():
    return Config(Calculus.CLSTAR, Order.SECOND, Strategy.CBV, LabelSet.REACTIVE_ONLY)


@pytest.fixture(scope="session")
def first_order_cl():
    return Config(Calculus.CL, Order.FIRST, Strategy.LAZY, LabelSet.REACTIVE_ONLY, arg_pool=2)


@pytest.fixture(scope="session")
def k_term():
    return parse_term("K")


@pytest.fixture(scope="session")
def k_expansion():
    # T(λxy.x)
    return parse_term("S(K K)(S K K)")


@pytest.fixture(scope="session")
def omega_cl():
    return OMEGA_CL


# ------------------------------------------------------------------
#                         FUNCTION SCOPED
# ------------------------------------------------------------------
@pytest.fixture(scope="function")
def game(lazy_finite):
    return BisimulationGame(lazy_finite, fuel=FUEL)


@pytest.fixture(scope="function")
def blind_game(lazy_finite):
    return BisimulationGame(lazy_finite, fuel=FUEL, divergence_blind=True)


@pytest.fixture(scope="function")
def config_file(tmp_path):
    path = tmp_path / "ipobisim.toml"
    path.write_text(
        "[defaults]\n"
        "depth = 3\n"
        "fuel = 64\n"
        "colour = 1\n"
        "\n"
        "[acceptance]\n"
        "coincidence_depth = 5\n"
    )
    return path
