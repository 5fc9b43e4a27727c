"""
Allows calling `robustspc-[command]` as `python -m robustspc [command]`.
"""

import sys
from importlib import import_module

commands = {"phase1": ["run", "phase1_script"],
            "monitor": ["run", "monitor_script"],
            "simulate": ["run", "simulate_script"],
            "qq": ["run", "qq_script"],
            }

help_msg = ("Add one of the following commands and its arguments "
            "(`<command> -h` for help): %r" % list(commands))

if __name__ == "__main__":

    try:
        command = sys.argv[1].lower()
    except IndexError:  # no command
        print(help_msg)
        sys.exit(2)
    else:
        module, func = commands.get(command, (None, None))
        if module is None:
            print(help_msg)
            sys.exit(0 if command in ["-h", "--help"] else 2)
        sys.argv.pop(1)
        getattr(import_module("robustspc." + module), func)()
