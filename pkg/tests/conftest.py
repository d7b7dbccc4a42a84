"""Shared fixtures: reference riboswitch constructs and small engines.

The six reference constructs (RS1-RS10) are the originally proposed
theophylline riboswitches; sequences and structures are listed per region
(aptamer, spacer, complementary region, 8-U stretch).
"""

import pytest

from ribolib.fold import InternalEngine
from ribolib.ribo import THEOPHYLLINE_APTAMER, riboswitch_space

APT = THEOPHYLLINE_APTAMER
APT_DB_A = "...........(((((.....)))))....(((((((((((("  # RS1/RS2 aptamer part
APT_DB_B = "...........(((((.....)))))...((((((((((((("  # RS3
APT_DB_C = "...........(((((.....)))))....(((((((((((("  # RS4
APT_DB_D = "........((((((((.....)))))...)))(((((((((("  # RS8/RS10

REFERENCE_CONSTRUCTS = {
    "RS1": {
        "spacer": "UUACAUC",
        "comp": "UGAAGUGCUGCC",
        "structure": APT_DB_A + "......." + "))))))))))))" + "........",
    },
    "RS2": {
        "spacer": "UGAUCUCGCU",
        "comp": "UGAAGUGCUGC",
        "structure": APT_DB_A + ".........." + ")))))))))))" + ").......",
    },
    "RS3": {
        "spacer": "UUUACAUACUCGGUAAAC",
        "comp": "UGAAGUGCUGCCA",
        "structure": APT_DB_B + "(((((.......)))))." + ")))))))))))))" + "........",
    },
    "RS4": {
        "spacer": "AACCGAAAUUUGCGCU",
        "comp": "UGAAGUGCUGC",
        "structure": APT_DB_C + "(..((.......)).)" + ")))))))))))" + ").......",
    },
    "RS8": {
        "spacer": "CUCCUAGUGGAG",
        "comp": "UGAAGUGCUG",
        "structure": APT_DB_D + "((((....))))" + "))))))))))" + "........",
    },
    "RS10": {
        "spacer": "GAAAUCUC",
        "comp": "UGAAGUGCUG",
        "structure": APT_DB_D + "((....)" + ")))))))))))" + "........",
    },
}

for name, construct in REFERENCE_CONSTRUCTS.items():
    construct["sequence"] = APT + construct["spacer"] + construct["comp"] + "U" * 8
    assert len(construct["sequence"]) == len(construct["structure"]), name


@pytest.fixture(scope="session")
def engine():
    return InternalEngine()


@pytest.fixture(scope="session")
def theo_space():
    return riboswitch_space()


@pytest.fixture(scope="session")
def reference_constructs():
    return REFERENCE_CONSTRUCTS
