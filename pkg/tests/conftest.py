from pathlib import Path

import pytest

from alphacross.blotter import Blotter

DATA = Path(__file__).parent / "data"

# Manager A and Manager B books, in dollars
MANAGER_A = {"MSFT": 200_000, "IBM": 300_000, "ORCL": 500_000, "AAPL": -600_000, "DELL": -400_000}
MANAGER_B = {"AAPL": 500_000, "ORCL": 300_000, "MSFT": -400_000, "DELL": -200_000, "JAVA": -200_000}


@pytest.fixture
def two_managers_csv():
    return DATA / "two_managers.csv"


@pytest.fixture
def two_managers():
    return (
        Blotter.from_dollars("A", 10_000_000, MANAGER_A),
        Blotter.from_dollars("B", 10_000_000, MANAGER_B),
    )
