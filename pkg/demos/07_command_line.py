"""The command-line front end writes the data behind each diagnostic as a table.

The same entry point is installed as the ``ptwalk`` console script; here it
is driven in-process. Every table starts with a commented header carrying the
resolved configuration.
"""

from ptwalk.cli import main

main(["ep-grid", "--theta1", "pi/4", "--theta2", "-pi/7"])
main(["validate", "--gamma-range", "0.2:0.4:0.05"])
main(["trace", "--formalism", "metric", "--gamma", "0.35", "--T", "5"])
main(["blp-scan", "--exp-gamma-range", "1.2:1.5:0.1", "--T", "50", "--format", "json"])
