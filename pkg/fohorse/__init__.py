import os

__version__ = "0.1.0"


def _load_settings_file():
    path = os.getenv("FOHORSE_SETTINGS")
    if not path:
        return {}

    import yaml

    with open(path, "r") as sfile:
        loaded = yaml.safe_load(sfile)

    return loaded or {}


class register_setting:
    """Defines a setting which will be dynamically read when loaded

    Settings come from the yaml file named by ``FOHORSE_SETTINGS``. The file is
    re-read on every access so tests can point it somewhere else.
    """

    def __init__(self, setting):
        self.setting = setting

    def __set__(self, obj, val):
        raise AttributeError("{:s} settings cannot be overwritten".format(self.setting))

    def __delete__(self, obj):
        raise AttributeError("{:s} settings cannot be deleted".format(self.setting))

    def __get__(self, obj, klass=None):
        overridden_settings = _load_settings_file()
        return overridden_settings.get(self.setting, {})


class _FohorseSettings:
    SOLVER_SETTINGS = register_setting("SOLVER_SETTINGS")
    BENCH_SETTINGS = register_setting("BENCH_SETTINGS")
    LOGGING = register_setting("LOGGING")


fsettings = _FohorseSettings()
