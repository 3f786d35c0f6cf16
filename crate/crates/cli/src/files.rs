use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use monge_core::param::NormalForm12;
use monge_core::pde::{Branch, NormalFormST0};
use monge_core::symcore::{parse, DomainBox, Expr};
use monge_core::system::SystemDef;
use serde::de::DeserializeOwned;
use serde::Deserialize;

#[derive(Debug, Deserialize)]
pub struct NormalFormFile {
    pub kappa: String,
    pub alpha: String,
    pub beta: String,
    pub a: String,
    pub b: String,
    pub c: String,
    pub alpha_inverse: Option<String>,
    pub beta_inverse: Option<String>,
}

#[derive(Debug, Deserialize)]
pub struct NormalForm12File {
    pub kappa: String,
    pub a: String,
    pub b: String,
    pub c: String,
}

/// On-disk system definition.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub g: String,
    pub h: String,
    #[serde(default)]
    pub domain: BTreeMap<String, (f64, f64)>,
    pub normal_form: Option<NormalFormFile>,
    pub normal_form_12: Option<NormalForm12File>,
    pub gamma: Option<String>,
    pub branch: Option<String>,
}

pub struct LoadedSystem {
    pub sys: SystemDef,
    pub file: SystemFile,
}

fn expr(text: &str, what: &str) -> Result<Expr> {
    parse(text).map_err(|e| anyhow::Error::new(e).context(format!("parsing {what} `{text}`")))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("decoding {}", path.display()))
}

impl LoadedSystem {
    pub fn load(path: &Path) -> Result<LoadedSystem> {
        let file: SystemFile = read_json(path)?;
        let mut domain = DomainBox::default();
        for (v, (lo, hi)) in &file.domain {
            if lo.is_nan() || hi.is_nan() || lo >= hi {
                anyhow::bail!(monge_core::Error::Precondition(format!("empty domain range for {v}: [{lo}, {hi}]")));
            }
            domain = domain.with(v, *lo, *hi);
        }
        let sys = SystemDef::new(expr(&file.g, "g")?, expr(&file.h, "h")?, domain)?;
        Ok(LoadedSystem { sys, file })
    }

    pub fn normal_form(&self) -> Result<Option<NormalFormST0>> {
        let Some(nf) = &self.file.normal_form else { return Ok(None) };
        let opt = |s: &Option<String>, w: &str| s.as_deref().map(|t| expr(t, w)).transpose();
        Ok(Some(NormalFormST0 {
            kappa: expr(&nf.kappa, "kappa")?,
            alpha: expr(&nf.alpha, "alpha")?,
            beta: expr(&nf.beta, "beta")?,
            a: expr(&nf.a, "a")?,
            b: expr(&nf.b, "b")?,
            c: expr(&nf.c, "c")?,
            domain: self.sys.domain.clone(),
            alpha_inverse: opt(&nf.alpha_inverse, "alpha_inverse")?,
            beta_inverse: opt(&nf.beta_inverse, "beta_inverse")?,
        }))
    }

    pub fn normal_form_12(&self) -> Result<Option<NormalForm12>> {
        let Some(nf) = &self.file.normal_form_12 else { return Ok(None) };
        Ok(Some(NormalForm12 {
            kappa: expr(&nf.kappa, "kappa")?,
            a: expr(&nf.a, "a")?,
            b: expr(&nf.b, "b")?,
            c: expr(&nf.c, "c")?,
            domain: self.sys.domain.clone(),
        }))
    }

    pub fn gamma(&self) -> Result<Option<Expr>> {
        self.file.gamma.as_deref().map(|t| expr(t, "gamma")).transpose()
    }

    pub fn branch(&self) -> Result<Option<Branch>> {
        self.file.branch.as_deref().map(|b| b.parse::<Branch>().map_err(anyhow::Error::new)).transpose()
    }
}

/// `{"p": "..."}`.
#[derive(Debug, Deserialize)]
pub struct CandidateFile {
    pub p: String,
}

impl CandidateFile {
    pub fn expr(&self) -> Result<Expr> {
        expr(&self.p, "p")
    }
}

#[derive(Debug, Deserialize)]
pub struct FlatFile {
    pub a: String,
    pub b: String,
    pub order: usize,
}

impl FlatFile {
    pub fn to_flat(&self) -> Result<monge_core::param::FlatOutput> {
        Ok(monge_core::param::FlatOutput { a: expr(&self.a, "a")?, b: expr(&self.b, "b")?, order: self.order })
    }
}

pub fn parse_expr(text: &str, what: &str) -> Result<Expr> {
    expr(text, what)
}
