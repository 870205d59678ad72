import json
from fractions import Fraction
from importlib import resources

import pytest

from outcomekit.lang import ProgramState, parse_program
from outcomekit.proofs import proof_from_dict
from outcomekit.semiring import BOOL, PROB


def load_corpus_program(name):
    text = resources.files("outcomekit.corpus").joinpath(f"{name}.prog").read_text()
    return parse_program(text)


def load_corpus_proof(name):
    text = resources.files("outcomekit.corpus").joinpath(f"{name}.proof.json").read_text()
    return proof_from_dict(json.loads(text))


def corpus_proof_dict(name):
    text = resources.files("outcomekit.corpus").joinpath(f"{name}.proof.json").read_text()
    return json.loads(text)


@pytest.fixture
def s0():
    return ProgramState.make(x=0)


@pytest.fixture
def s1():
    return ProgramState.make(x=1)


def frac(text):
    return Fraction(text)
