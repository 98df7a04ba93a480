import time

# pylint: disable=attribute-defined-outside-init


class ContextTimer:
    """ Simple wall clock timer used as context manager

    ``elapsed`` can be read while still inside the block, which is how the
    solver checks its time limit.
    """

    def __enter__(self):
        self.start = time.perf_counter()
        self.end = None
        return self

    def __exit__(self, *args):
        self.end = time.perf_counter()
        self.interval = self.end - self.start

    @property
    def elapsed(self):
        if self.end is not None:
            return self.end - self.start
        return time.perf_counter() - self.start
