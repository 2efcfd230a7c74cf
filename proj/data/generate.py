"""Synthetic loss observations for the casestudy subcommand."""
import numpy as np

rng = np.random.default_rng(20240501)


def write(name, values):
    with open(f"{name}.csv", "w") as fh:
        fh.write("value\n")
        for v in values:
            fh.write(f"{v:.6f}\n")


# clearly ordered: every Y observation is an X observation shifted up
base = rng.lognormal(0.0, 0.5, 2000)
write("ordered_x", base)
write("ordered_y", base + 1.0)

# two independent samples from nearly the same law
write("close_x", rng.lognormal(0.0, 0.8, 2000))
write("close_y", 1.01 * rng.lognormal(0.0, 0.8, 2000))

