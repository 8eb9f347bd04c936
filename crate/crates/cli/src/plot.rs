//! Generated matplotlib scripts. Each reads the CSVs next to it and writes
//! a PNG of the same stem.

const HEADER: &str = "\
import csv
import os
import sys

import matplotlib
matplotlib.use(\"Agg\")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(sys.argv[0]))


def read(name):
    with open(os.path.join(HERE, name), newline=\"\") as f:
        return list(csv.DictReader(f))


def col(rows, key):
    return [float(r[key]) if r[key] != \"\" else float(\"nan\") for r in rows]

";

fn script(body: String) -> String {
    format!("{HEADER}{body}")
}

/// Monte Carlo means against exact values with the identity line.
pub fn scatter_script(csv: &str) -> String {
    script(format!(
        "rows = read(\"{csv}\")
exact, mc, err = col(rows, \"exact\"), col(rows, \"mc_mean\"), col(rows, \"mc_stderr\")
lo, hi = min(exact + mc), max(exact + mc)
fig, ax = plt.subplots(figsize=(4.5, 4.5))
ax.plot([lo, hi], [lo, hi], color=\"0.6\", lw=1, label=\"identity\")
ax.errorbar(exact, mc, yerr=[3 * e for e in err], fmt=\"o\", label=\"Monte Carlo (3 s.e.)\")
for r, x, y in zip(rows, exact, mc):
    ax.annotate(r[\"quantity\"], (x, y), textcoords=\"offset points\", xytext=(4, -10), fontsize=7)
ax.set_xlabel(\"exact\")
ax.set_ylabel(\"Monte Carlo\")
ax.legend()
fig.tight_layout()
fig.savefig(os.path.join(HERE, \"scatter.png\"), dpi=150)
"
    ))
}

/// CHSH value along the sweep `(0, 2t, t, -t)`.
pub fn chsh_sweep_script(csv: &str) -> String {
    script(format!(
        "rows = read(\"{csv}\")
t = col(rows, \"theta\")
fig, ax = plt.subplots(figsize=(6, 4))
ax.plot(t, [abs(v) for v in col(rows, \"s_quantum\")], label=\"singlet |S|\")
ax.plot(t, [abs(v) for v in col(rows, \"s_hidden_variable\")], label=\"sphere-sign model |S|\")
ax.axhline(2.0, color=\"0.4\", ls=\"--\", lw=1, label=\"2\")
ax.axhline(2 * 2 ** 0.5, color=\"0.4\", ls=\":\", lw=1, label=\"2 sqrt 2\")
ax.set_xlabel(\"t (rad); settings (0, 2t, t, -t)\")
ax.set_ylabel(\"|S|\")
ax.legend()
fig.tight_layout()
fig.savefig(os.path.join(HERE, \"sweep.png\"), dpi=150)
"
    ))
}

/// Empirical pair correlations next to their references.
pub fn correlation_script(csv: &str) -> String {
    script(format!(
        "rows = read(\"{csv}\")
labels = [r[\"pair\"] for r in rows]
x = range(len(rows))
fig, ax = plt.subplots(figsize=(6, 4))
ax.bar([i - 0.2 for i in x], col(rows, \"empirical\"), width=0.4, label=\"stream\")
ax.bar([i + 0.2 for i in x], col(rows, \"exact_or_quantum\"), width=0.4, label=\"reference\")
ax.set_xticks(list(x))
ax.set_xticklabels(labels)
ax.axhline(0, color=\"0.5\", lw=0.8)
ax.set_ylabel(\"correlation\")
ax.legend()
fig.tight_layout()
fig.savefig(os.path.join(HERE, \"correlations.png\"), dpi=150)
"
    ))
}

/// Position (and momentum) variance against time for each particle.
pub fn moments_script(csv: &str) -> String {
    script(format!(
        "rows = read(\"{csv}\")
fig, ax = plt.subplots(figsize=(6, 4))
for j in sorted({{r[\"particle\"] for r in rows}}):
    sub = [r for r in rows if r[\"particle\"] == j]
    ax.plot(col(sub, \"time\"), col(sub, \"x_var\"), label=f\"<x^2>, particle {{j}}\")
    if sub[0][\"p_var\"] != \"\":
        ax.plot(col(sub, \"time\"), col(sub, \"p_var\"), ls=\"--\", label=f\"<p^2>, particle {{j}}\")
ax.set_xlabel(\"t\")
ax.set_ylabel(\"variance\")
ax.legend()
fig.tight_layout()
fig.savefig(os.path.join(HERE, \"moments.png\"), dpi=150)
"
    ))
}

/// Forward/backward profiles and the osmotic velocity against the
/// density-gradient estimate.
pub fn velocity_script(velocity_csv: &str, overlay_csv: &str) -> String {
    script(format!(
        "v = read(\"{velocity_csv}\")
o = read(\"{overlay_csv}\")
fig, (a, b) = plt.subplots(1, 2, figsize=(10, 4))
x = col(v, \"bin_center\")
a.errorbar(x, col(v, \"v_plus\"), yerr=col(v, \"v_plus_err\"), fmt=\"o-\", ms=3, label=\"v+\")
a.errorbar(x, col(v, \"v_minus\"), yerr=col(v, \"v_minus_err\"), fmt=\"s-\", ms=3, label=\"v-\")
a.set_xlabel(\"x\")
a.set_ylabel(\"velocity\")
a.legend()
b.errorbar(col(o, \"position\"), col(o, \"u\"), yerr=col(o, \"u_err\"), fmt=\"o\", ms=3, label=\"(v- - v+)/2\")
b.plot(col(o, \"position\"), col(o, \"density_u\"), label=\"-D d ln P/dx (kernel estimate)\")
b.set_xlabel(\"x\")
b.set_ylabel(\"u\")
b.legend()
fig.tight_layout()
fig.savefig(os.path.join(HERE, \"velocity.png\"), dpi=150)
"
    ))
}
