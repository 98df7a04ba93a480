from fohorse.testutils.fixtures import *  # noqa
