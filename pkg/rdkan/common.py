""" Define common functions/classes which cannot be uniquely categorized anywhere else
"""
# ----------------------------------------------------------------------------------------
#  Imports
# ----------------------------------------------------------------------------------------
import json
from pathlib import Path

import numpy as np
import pandas as pd
import yaml
from nettoolkit.nettoolkit_common import create_folders
from nettoolkit.nettoolkit_db import write_to_xl
from tabulate import tabulate

from .colorprint import print_banner
from .exceptions import ConfigError

# ----------------------------------------------------------------------------------------
#  Some PreDefined Static Entries
# ----------------------------------------------------------------------------------------
SPEED_OF_LIGHT = 3e8                # m/s, rounded as in the radar datasheet arithmetic
YAML_SUFFIXES = {'.yaml', '.yml'}

# ----------------------------------------------------------------------------------------
#  Some common Functions
# ----------------------------------------------------------------------------------------

# ------------------------ [ READ/INPUT ] ------------------------ #

# read a json (or yaml) configuration document and return it as dictionary
def read_config_file(file):
	p = Path(file)
	try:
		with open(p, 'r') as f:
			s = f.read()
	except OSError as e:
		raise ConfigError(f"config file read error: {p}\n{e}") from e
	try:
		if p.suffix.lower() in YAML_SUFFIXES:
			d = yaml.safe_load(s)
		else:
			d = json.loads(s)
	except (json.JSONDecodeError, yaml.YAMLError) as e:
		raise ConfigError(f"config file data error: {p}\nPossible Reason incorrect format.\n{e}") from e
	if not isinstance(d, dict):
		raise ConfigError(f"config file {p} must hold a mapping at top level")
	return d

# ------------------------ [ VALIDATORS ] ------------------------ #
# attrs validators: (instance, attribute, value) -> None, raise ConfigError on failure

def positive(instance, attribute, value):
	if not np.isfinite(value) or value <= 0:
		raise ConfigError(f"{type(instance).__name__}.{attribute.name} must be > 0, got {value!r}")

def non_negative(instance, attribute, value):
	if not np.isfinite(value) or value < 0:
		raise ConfigError(f"{type(instance).__name__}.{attribute.name} must be >= 0, got {value!r}")

def power_of_two(instance, attribute, value):
	if int(value) != value or value < 1 or (int(value) & (int(value) - 1)):
		raise ConfigError(f"{type(instance).__name__}.{attribute.name} must be a power of two, got {value!r}")

def open_probability(instance, attribute, value):
	if not 0.0 < value < 1.0:
		raise ConfigError(f"{type(instance).__name__}.{attribute.name} must lie in (0, 1), got {value!r}")

def ordered_pair(instance, attribute, value):
	if len(value) != 2 or value[0] > value[1]:
		raise ConfigError(f"{type(instance).__name__}.{attribute.name} must be a (low, high) pair, got {value!r}")

def odd_shape(instance, attribute, value):
	if len(value) != 2 or any(int(v) != v or v < 1 or v % 2 == 0 for v in value):
		raise ConfigError(f"{type(instance).__name__}.{attribute.name} must be two odd sizes, got {value!r}")

# ------------------------ [ WRITE / OUTPUT ] ------------------------ #

# create ( if missing ) and return the output folder
def output_folder(folder, silent=True):
	p = Path(folder)
	try:
		create_folders([str(p),], silent=silent)
	except OSError as e:
		raise ConfigError(f"output folder not writable: {p}\n{e}") from e
	if not p.is_dir():
		raise ConfigError(f"output folder not writable: {p}")
	return p

def write_json(d, file):
	with open(file, 'w') as f:
		json.dump(d, f, indent=2, default=_json_default)

def _json_default(o):
	if isinstance(o, np.generic): return o.item()
	if isinstance(o, np.ndarray): return o.tolist()
	if isinstance(o, Path): return str(o)
	raise TypeError(f"not serializable: {type(o).__name__}")

# prints summary results in given table format.
def print_report(result, tablefmt=None, color='magenta'):
	if not tablefmt: tablefmt = "rounded_outline"
	df = result if isinstance(result, pd.DataFrame) else pd.DataFrame(result)
	df = df.fillna("")
	printable = tabulate(df, headers='keys', tablefmt=tablefmt, showindex=False)
	print_banner(printable, color=color)
	print_banner("", color='white')

# write a table (DataFrame or list of row dicts) to csv
def write_csv(result, output_csv_report_file, report_cols=None):
	df = result if isinstance(result, pd.DataFrame) else pd.DataFrame(result)
	if report_cols: df = df[list(report_cols)]
	df.to_csv(output_csv_report_file, index=False)

# write several tables to one excel workbook, a sheet per key ( excel caps sheet names at 31 chars )
def write_workbook(output_file, sheets, index=False):
	sheets = {str(name)[:31]: df for name, df in sheets.items()}
	write_to_xl(str(output_file), sheets, index=index, overwrite=True)

# append a prefixed line to the debug log ( skipped when no log file is set )
def write_debug_log(msg, log_file=None, pfx="[+]", onscreen=False):
	s = f"{pfx} {msg}"
	if onscreen: print_banner(s)
	if log_file:
		with open(log_file, 'a') as f:
			f.write(s + "\n")

# ----------------------------------------------------------------------------------------

# ----------------------------------------------------------------------------------------
#  main
# ----------------------------------------------------------------------------------------
if __name__ == "__main__":
	pass
# ----------------------------------------------------------------------------------------
