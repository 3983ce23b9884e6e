"""Shared test utilities."""


def scripted_clock(durations):
    """A fake monotonic clock for one timed region per duration.

    Each timed region reads the clock twice (start, stop); the k-th
    region sees (0.0, durations[k]), so its elapsed time is exactly
    durations[k] with no float drift.
    """
    ticks = []
    for d in durations:
        ticks.append(0.0)
        ticks.append(d)
    it = iter(ticks)

    def clock():
        return next(it)

    return clock
