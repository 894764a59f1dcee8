import os
import sys

# make `utils`, `solvers` and `harness` importable from tests/
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))


def pytest_addoption(parser):
    parser.addoption("--record-golden", action="store_true", default=False,
                     help="rewrite tests/data fixtures from the current code instead of comparing against them")
