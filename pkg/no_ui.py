# @title Run | Output generated inside "run_output/<config hash>"
# @markdown Main Option | CONFIG is a path or the name of a file inside "src/configs"
COMMAND = "steady" # @param ["synthesize", "steady", "sweep", "optimize", "validate", "dump-target"]
CONFIG = "line3_resonant.json" # @param {type:"string"}
# @markdown Pinned point (rates in units of omega0, leave 0 to keep the config value)
KAPPA = 0 # @param {type:"number"}
DELTA = 0 # @param {type:"number"}
J0 = 0 # @param {type:"number"}
J = 0 # @param {type:"number"}
# @markdown Sweep Options
WORKERS = 1 # @param {type:"integer"}
OUTPUT_DIR = "run_output" # @param {type:"string"}

import subprocess

command = [
    "python",
    "src/main.py",
    COMMAND,
    "-c", CONFIG,
    "-o", OUTPUT_DIR,
    "-w", str(WORKERS),
]
for flag, value in (("-k", KAPPA), ("-d", DELTA), ("--j0", J0), ("--j", J)):
    if value:
        command += [flag, str(value)]

# Open a subprocess and capture its output
process = subprocess.Popen(command, stdout=subprocess.PIPE, stderr=subprocess.STDOUT, universal_newlines=True)

# Print the output in real-time
for line in process.stdout:
    print(line, end='')

# Wait for the process to finish
process.wait()
