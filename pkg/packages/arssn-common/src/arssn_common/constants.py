"""Constants for progress bars and other settings."""

TQDM_BAR_FORMAT = "{desc} ▕{bar:50}▏ {n_fmt:>6}/{total_fmt:<6} ({rate_fmt:>12}, ETA: {remaining:>6}) {postfix}"
TQDM_DEFAULTS = {
    "bar_format": TQDM_BAR_FORMAT,
    "unit": "cell",
    "miniters": 1,
    "colour": "cyan",
}
