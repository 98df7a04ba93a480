#!/usr/bin/env python

from setuptools import setup


TESTS_REQUIRE = [
    "pytest",
    "pytest-flakes",
    "pytest-cov",
    "pytest-xdist",
    "factory_boy",
    "colorlog",
    "testfixtures",
]


SETUP_REQUIRES = [
    "setuptools>=36",
]


if __name__ == "__main__":
    setup(
        name="fohorse",
        setup_requires=SETUP_REQUIRES,
        tests_require=TESTS_REQUIRE,
        extras_require={
            "tests": TESTS_REQUIRE,
        }
    )
