import importlib.util
import random
from pathlib import Path

import pytest
from click.testing import CliRunner
from hypothesis import settings

from app.services.coxeter import CoxeterGroup
from app.services.parabolic import ParabolicService
from app.services.presentation import load_spec
from app.services.words import Syllable, WordEngine

ROOT = Path(__file__).resolve().parent.parent
DATA_DIR = ROOT / 'app' / 'services' / 'data'

settings.register_profile('parabolics', max_examples=60, deadline=None, derandomize=True)
settings.load_profile('parabolics')

GROUP_SPECS = ['path_abc', 'mixed_abc', 'pentagon', 'k3', 'square_raag', 'z2_z3']
CAMPAIGN_SPECS = ['path_abc', 'mixed_abc', 'pentagon', 'k3', 'square_raag']


def spec_path(name: str) -> Path:
    return DATA_DIR / f"{name}.grp"


def load(name: str):
    return load_spec(spec_path(name))


def random_word(rng: random.Random, n: int, max_length: int = 8, max_exp: int = 3):
    length = rng.randint(0, max_length)
    return tuple(Syllable(rng.randrange(n), rng.choice([e for e in range(-max_exp, max_exp + 1) if e]))
                 for _ in range(length))


@pytest.fixture
def path_spec():
    return load('path_abc')


@pytest.fixture
def path_engine(path_spec):
    return WordEngine(path_spec)


@pytest.fixture
def path_service(path_engine):
    return ParabolicService(path_engine)


@pytest.fixture
def engine_for():
    def build(name: str) -> WordEngine:
        return WordEngine(load(name))
    return build


@pytest.fixture
def service_for():
    def build(name: str, exponent_bound: int = 2) -> ParabolicService:
        return ParabolicService(WordEngine(load(name)), exponent_bound)
    return build


@pytest.fixture
def coxeter_for():
    def build(name: str) -> CoxeterGroup:
        return CoxeterGroup(load(name))
    return build


@pytest.fixture(scope='session')
def cli_module():
    # app.py shares its name with the app package, so load it by path
    module_spec = importlib.util.spec_from_file_location('parabolics_cli', ROOT / 'app.py')
    module = importlib.util.module_from_spec(module_spec)
    module_spec.loader.exec_module(module)
    return module


@pytest.fixture
def run_cli(cli_module):
    runner = CliRunner()

    def invoke(*args, spec: str = 'path_abc'):
        argv = ['--spec', str(spec_path(spec))] if spec else []
        return runner.invoke(cli_module.create_cli(), argv + list(args))
    return invoke
