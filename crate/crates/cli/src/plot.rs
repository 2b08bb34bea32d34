//! Matplotlib scripts for the figure datasets. Scripts read the CSV from
//! their own directory and save a PDF next to it; nothing is rendered here.

use std::fmt;

use crate::config::Figure;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaError {
    pub figure: Figure,
    pub missing: Vec<String>,
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "dataset does not fit {}: missing columns {}", self.figure.tag(), self.missing.join(", "))
    }
}

impl std::error::Error for SchemaError {}

pub fn required_columns(figure: Figure) -> &'static [&'static str] {
    match figure {
        Figure::Fig4 => &["ejs2_over_ec", "dphi", "ng", "e0", "e1", "e2"],
        Figure::Fig5 => &["ejs2_over_ec", "d", "f01_ghz", "m_n", "m_1phi", "m_2phi"],
        Figure::Fig6 => &["ejs2_over_ec", "dphi", "f01_ghz", "m_n", "m_1phi", "m_2phi"],
        Figure::Fig7 => &["ng", "dphi", "e0_ghz", "e1_ghz", "f01_model_ghz"],
        Figure::Fig8 => &["ejs2_over_ec", "dphi", "tphi_s", "tphi_charge_s", "tphi_flux_s", "t1_flux_s", "t1_dielectric_s"],
        Figure::Fig9 => &["ejs2_ghz", "ec_ghz", "t2_s", "tphi_charge_s", "tphi_flux_s", "limiting"],
    }
}

const PREAMBLE: &str = r#"import pathlib

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

HERE = pathlib.Path(__file__).resolve().parent
"#;

fn body(figure: Figure) -> &'static str {
    match figure {
        Figure::Fig4 => {
            r#"
ratios = sorted(df.ejs2_over_ec.unique())
fluxes = sorted(df.dphi.unique())
fig, axes = plt.subplots(len(ratios), len(fluxes), figsize=(4 * len(fluxes), 2.6 * len(ratios)), sharex=True, squeeze=False)
for i, r in enumerate(ratios):
    for j, f in enumerate(fluxes):
        ax = axes[i][j]
        sub = df[(df.ejs2_over_ec == r) & (df.dphi == f)]
        for m in range(3):
            ax.plot(sub.ng, sub[f"e{m}"], label=f"$E_{m}$")
        ax.set_title(rf"$E_{{J\Sigma 2}}/E_C = {r:g}$, $\delta\Phi = {f:g}$", fontsize=9)
        ax.set_ylabel(r"$E / E_{01}^{pure}$")
axes[-1][0].set_xlabel(r"$n_g$")
axes[-1][-1].set_xlabel(r"$n_g$")
axes[0][0].legend()
"#
        }
        Figure::Fig5 => {
            r#"
panels = [("f01_ghz", r"$f_{01}$ (GHz)"), ("m_n", r"$M_n$"), ("m_1phi", r"$M_{1\varphi}$"), ("m_2phi", r"$M_{2\varphi}$")]
fig, axes = plt.subplots(2, 2, figsize=(8, 6), sharex=True)
for ax, (col, label) in zip(axes.flat, panels):
    for r, sub in df.groupby("ejs2_over_ec"):
        ax.loglog(sub.d, sub[col], label=rf"$E_{{J\Sigma 2}}/E_C = {r:g}$")
    ax.set_ylabel(label)
for ax in axes[-1]:
    ax.set_xlabel("asymmetry d")
axes[0][0].legend(fontsize=8)
"#
        }
        Figure::Fig6 => {
            r#"
panels = [("f01_ghz", r"$f_{01}$ (GHz)"), ("m_n", r"$M_n$"), ("m_1phi", r"$M_{1\varphi}$"), ("m_2phi", r"$M_{2\varphi}$")]
ratios = np.sort(df.ejs2_over_ec.unique())
fluxes = np.sort(df.dphi.unique())
fig, axes = plt.subplots(2, 2, figsize=(9, 7), sharex=True, sharey=True)
for ax, (col, label) in zip(axes.flat, panels):
    z = df.pivot(index="dphi", columns="ejs2_over_ec", values=col).loc[fluxes, ratios].to_numpy()
    mesh = ax.pcolormesh(ratios, fluxes, np.log10(np.clip(z, 1e-12, None)), shading="nearest")
    fig.colorbar(mesh, ax=ax, label="log10 " + label)
    ax.set_xscale("log")
    ax.set_yscale("log")
for ax in axes[-1]:
    ax.set_xlabel(r"$E_{J\Sigma 2}/E_C$")
for ax in axes[:, 0]:
    ax.set_ylabel(r"$\delta\Phi$")
"#
        }
        Figure::Fig7 => {
            r#"
fig, ax = plt.subplots(figsize=(5, 4))
for ng, style in [(0.0, "-"), (0.5, "--")]:
    sub = df[df.ng == ng]
    ax.plot(sub.dphi, sub.e0_ghz, "k" + style, label=rf"$n_g = {ng:g}$")
    ax.plot(sub.dphi, sub.e1_ghz, "k" + style)
ax.set_xlabel(r"$\delta\Phi$")
ax.set_ylabel("energy (GHz)")
ax.legend()
"#
        }
        Figure::Fig8 => {
            r#"
ratios = sorted(df.ejs2_over_ec.unique())
fig, axes = plt.subplots(len(ratios), 2, figsize=(9, 2.8 * len(ratios)), sharex=True, squeeze=False)
for i, r in enumerate(ratios):
    sub = df[df.ejs2_over_ec == r]
    left, right = axes[i]
    left.loglog(sub.dphi, sub.tphi_s, "k", label="total")
    left.loglog(sub.dphi, sub.tphi_charge_s, label="charge")
    left.loglog(sub.dphi, sub.tphi_flux_s, label="flux")
    right.loglog(sub.dphi, sub.t1_flux_s, label="flux")
    right.loglog(sub.dphi, sub.t1_dielectric_s, label="dielectric")
    left.set_ylabel(rf"$T_\varphi$ (s), $E_{{J\Sigma 2}}/E_C = {r:g}$")
    right.set_ylabel(r"$T_1$ (s)")
for ax in axes[-1]:
    ax.set_xlabel(r"$\delta\Phi$")
axes[0][0].legend(fontsize=8)
axes[0][1].legend(fontsize=8)
"#
        }
        Figure::Fig9 => {
            r#"
ejs2 = np.sort(df.ejs2_ghz.unique())
ec = np.sort(df.ec_ghz.unique())
grid = lambda col: df.pivot(index="ejs2_ghz", columns="ec_ghz", values=col).loc[ejs2, ec].to_numpy()
t2 = grid("t2_s")
fig, ax = plt.subplots(figsize=(6, 5))
mesh = ax.pcolormesh(ec, ejs2, np.log10(np.clip(t2, 1e-4, 2e-2)), shading="nearest", cmap="viridis")
fig.colorbar(mesh, ax=ax, label=r"log10 $T_2$ (s)")
flags = df.limiting.fillna("none")
for tag, colour in [("temperature", "black"), ("charge", "tab:blue"), ("flux", "salmon")]:
    mask = df.assign(hit=flags.str.contains(tag)).pivot(index="ejs2_ghz", columns="ec_ghz", values="hit").loc[ejs2, ec].to_numpy()
    ax.contourf(ec, ejs2, mask.astype(float), levels=[0.5, 1.5], colors=[colour], alpha=0.35)
ok = df[~flags.str.contains("temperature") & df.t2_s.notna()]
if len(ok):
    best = ok.loc[ok.t2_s.idxmax()]
    ax.plot(best.ec_ghz, best.ejs2_ghz, "*", color="orange", markersize=14)
ax.set_xscale("log")
ax.set_yscale("log")
ax.set_xlabel(r"$E_C$ (GHz)")
ax.set_ylabel(r"$E_{J\Sigma 2}$ (GHz)")
"#
        }
    }
}

/// Script for `figure` reading `csv_name` from the script's directory.
pub fn emit_plot_script(columns: &[String], figure: Figure, csv_name: &str) -> Result<String, SchemaError> {
    let missing: Vec<String> = required_columns(figure)
        .iter()
        .filter(|c| !columns.iter().any(|have| have == *c))
        .map(|c| c.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(SchemaError { figure, missing });
    }
    let stem = csv_name.rsplit_once('.').map_or(csv_name, |(s, _)| s);
    Ok(format!(
        "{PREAMBLE}\ndf = pd.read_csv(HERE / {csv:?})\n{body}\nfig.tight_layout()\nfig.savefig(HERE / {pdf:?})\n",
        csv = csv_name,
        body = body(figure),
        pdf = format!("{stem}.pdf"),
    ))
}
