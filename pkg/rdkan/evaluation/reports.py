""" Accuracy tables, KDE dumps, runtime comparison and report writers
"""
# ----------------------------------------------------------------------------------------
#  Imports
# ----------------------------------------------------------------------------------------
from pathlib import Path
import time

import numpy as np
import pandas as pd
from jinja2 import Template

from ..colorprint import print_banner
from ..common import output_folder, print_report, write_csv, write_json, write_workbook
from ..detectors import DecisionRule, KanModel, OsCfarConfig, builtin_rule, detect, forward, os_cfar_detect
from ..detectors.pipeline import classify_features

# ----------------------------------------------------------------------------------------
#  Some PreDefined Static Entries
# ----------------------------------------------------------------------------------------
DEFAULT_MAP_SIZES = ((64, 32), (128, 32), (128, 64), (256, 64), (256, 128))
DEFAULT_CFAR_WINDOWS = (((9, 5), (1, 1)), ((13, 5), (2, 1)), ((17, 7), (2, 1)), ((21, 9), (2, 1)), ((25, 11), (3, 2)))
CURVE_COLS = ['snr_db', 'detector', 'pd', 'pfa']

HTML_TEMPLATE = Template("""<!DOCTYPE html>
<html><body>
<h1>{{ title }}</h1>
<h2>settings</h2>
<details>
<summary>run settings</summary>
<pre>
{{ settings }}
</pre>
</details>
{% for name, table in tables %}
<h2>{{ name }}</h2>
<details>
<summary>{{ name }} ({{ table.shape[0] }} rows)</summary>
{{ table.to_html(index=False, na_rep='') }}
</details>
{% endfor %}
</body></html>
""")

# ----------------------------------------------------------------------------------------
#  Classifier tables
# ----------------------------------------------------------------------------------------

def _counts(labels):
	labels = np.asarray(labels)
	return f"{int((labels == 0).sum())}:{int((labels == 1).sum())}"

def accuracy_table(classifiers, test_sets, train_set=None, m_bins=None):
	"""Accuracy of every classifier stage on every labelled test set.

	classifiers: {stage: DecisionRule | KanModel}, test_sets: {scenario: SegmentDataset}.
	"""
	rows = []
	for stage, clf in classifiers.items():
		m = m_bins or clf.m_bins
		for scenario, ds in test_sets.items():
			if len(ds):
				hypothesis, _ = classify_features(clf, ds.features(m))
				acc = 100.0 * float(np.mean(np.asarray(hypothesis) == ds.labels))
			else:
				acc = float('nan')
			rows.append({
				'stage': stage,
				'scenario': scenario,
				'm_bins': int(m),
				'train_h0:h1': _counts(train_set.labels) if train_set is not None else '',
				'test_h0:h1': _counts(ds.labels),
				'accuracy_pct': acc,
			})
	return pd.DataFrame(rows, columns=['stage', 'scenario', 'm_bins', 'train_h0:h1', 'test_h0:h1', 'accuracy_pct'])

# per segment ( h0, h1, label ) statistic values for external density plots
def kde_export(classifier, features, labels):
	features = np.asarray(features, dtype=float)
	if not features.size:
		return pd.DataFrame(columns=['h0', 'h1', 'label'])
	features = np.atleast_2d(features)
	if isinstance(classifier, DecisionRule):
		h0, h1 = classifier.h0_expr(features), classifier.h1_expr(features)
	elif isinstance(classifier, KanModel):
		logits = forward(classifier, features)
		h0, h1 = logits[:, 0], logits[:, 1]
	else:
		raise TypeError(f"cannot export statistics of {type(classifier).__name__}")
	return pd.DataFrame({'h0': np.asarray(h0, dtype=float), 'h1': np.asarray(h1, dtype=float),
						 'label': np.asarray(labels, dtype=np.int64)})

# ----------------------------------------------------------------------------------------
#  Runtime
# ----------------------------------------------------------------------------------------

def _best_time_ms(fn, repeats):
	fn()                                                            # warm-up
	best = np.inf
	for _ in range(max(1, repeats)):
		t0 = time.perf_counter_ns()
		fn()
		best = min(best, time.perf_counter_ns() - t0)
	return best / 1e6

# slope of log(runtime) against log(size)
def loglog_exponent(sizes, runtimes):
	sizes, runtimes = np.asarray(sizes, dtype=float), np.asarray(runtimes, dtype=float)
	ok = (sizes > 0) & (runtimes > 0)
	if ok.sum() < 2:
		return float('nan')
	return float(np.polyfit(np.log(sizes[ok]), np.log(runtimes[ok]), 1)[0])

def runtime_compare(map_sizes=DEFAULT_MAP_SIZES, classifier=None, cfar_cfg=None, repeats=3, seed=0):
	"""Wall-clock per dwell of the segment pipeline and OS-CFAR on noise-only maps.

	Returns ( timing frame, {detector: fitted exponent against map cell count} ).
	"""
	classifier = classifier or builtin_rule('paper-eq7-m10')
	cfar_cfg = cfar_cfg or OsCfarConfig()
	rng = np.random.default_rng(seed)
	rows = []
	for n, l in map_sizes:
		power = rng.exponential(size=(int(n), int(l)))
		for name, fn in (('kan', lambda: detect(power, classifier)), (cfar_cfg.detector_id, lambda: os_cfar_detect(power, cfar_cfg))):
			rows.append({'n_range': int(n), 'n_doppler': int(l), 'cells': int(n) * int(l), 'detector': name,
						 'runtime_ms': _best_time_ms(fn, repeats)})
	timing = pd.DataFrame(rows, columns=['n_range', 'n_doppler', 'cells', 'detector', 'runtime_ms'])
	exponents = {det: loglog_exponent(g['cells'], g['runtime_ms']) for det, g in timing.groupby('detector', sort=False)}
	return timing, exponents

# OS-CFAR runtime against the reference cell count
def cfar_window_sweep(windows=DEFAULT_CFAR_WINDOWS, map_shape=(256, 128), pfa=1e-3, repeats=3, seed=0):
	power = np.random.default_rng(seed).exponential(size=map_shape)
	rows = []
	for window, guard in windows:
		cfg = OsCfarConfig(window=window, guard=guard, pfa_design=pfa)
		rows.append({
			'window': f"{cfg.window[0]}x{cfg.window[1]}",
			'guard': f"{cfg.guard[0]}x{cfg.guard[1]}",
			'n_ref': cfg.n_ref,
			'n_ref_log_n_ref': cfg.n_ref * np.log(cfg.n_ref),
			'runtime_ms': _best_time_ms(lambda: os_cfar_detect(power, cfg), repeats),
		})
	return pd.DataFrame(rows)

# ----------------------------------------------------------------------------------------
#  Writers
# ----------------------------------------------------------------------------------------

def _tables(report):
	tables = [('curves', report.curves)]
	if report.accuracy is not None: tables.append(('accuracy', report.accuracy))
	if report.decay_rates: tables.append(('decay_rates', pd.DataFrame(report.decay_rates)))
	if report.timing is not None: tables.append(('timing', report.timing))
	if report.exponents:
		tables.append(('exponents', pd.DataFrame({'detector': list(report.exponents), 'exponent': list(report.exponents.values())})))
	if not report.trials.empty:
		trials = report.trials.copy()
		trials['ground_truth'] = trials['ground_truth'].map(str)
		tables.append(('trials', trials))
	return tables

def write_report(report, out_dir, stem='eval', display_progress=False):
	"""Write json, curves csv, timing csv, xlsx and html files of an EvalReport; return their paths."""
	out = output_folder(out_dir)
	files = {
		'json': out / f"{stem}.json",
		'curves': out / f"{stem}-curves.csv",
		'xlsx': out / f"{stem}.xlsx",
		'html': out / f"{stem}.html",
	}
	write_json({
		'settings': report.settings,
		'n_excluded': report.n_excluded,
		'curves': report.curves.to_dict(orient='records'),
		'accuracy': report.accuracy.to_dict(orient='records') if report.accuracy is not None else [],
		'decay_rates': report.decay_rates,
		'timing': report.timing.to_dict(orient='records') if report.timing is not None else [],
		'exponents': report.exponents,
		'kde_rows': 0 if report.kde is None else int(len(report.kde)),
	}, files['json'])
	curve_cols = CURVE_COLS + [c for c in report.curves.columns if c not in CURVE_COLS]
	write_csv(report.curves, files['curves'], curve_cols)
	if report.timing is not None:
		files['timing'] = out / f"{stem}-timing.csv"
		write_csv(report.timing, files['timing'])
	if report.kde is not None:
		files['kde'] = out / f"{stem}-kde.csv"
		write_csv(report.kde, files['kde'])
	tables = _tables(report)
	write_workbook(files["xlsx"], dict(tables))
	html = HTML_TEMPLATE.render(title=f"{stem} report", settings=pd.Series(report.settings).to_string(), tables=tables)
	Path(files['html']).write_text(html)
	if display_progress:
		if not report.curves.empty:
			print_report(report.curves.pivot(index='snr_db', columns='detector', values='pd').reset_index())
		print_banner(f"[+] report written to {out}", 'green')
	return files

# ----------------------------------------------------------------------------------------
#  main
# ----------------------------------------------------------------------------------------
if __name__ == "__main__":
	pass
# ----------------------------------------------------------------------------------------
