use thiserror::Error;

use super::{
    CountScheme, Depth2Scheme, ExistentialFoScheme, FoTreedepthScheme, KernelScheme, SpanningTreeScheme,
    TreedepthScheme,
};
use crate::cert::Scheme;
use crate::graph::NodeId;
use crate::logic::Sentence;

/// Short names accepted by [`build_scheme`].
pub const SCHEME_NAMES: [&str; 7] = ["st", "count", "efo", "fo2", "td", "kernel", "fo-td"];

/// Parameters a scheme may need; each scheme reads only its own.
#[derive(Clone, Debug, Default)]
pub struct SchemeParams {
    pub t: Option<usize>,
    pub k: Option<usize>,
    pub formula: Option<String>,
    pub expected: Option<u64>,
    pub root: Option<u64>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SchemeSpecError {
    #[error("unknown scheme `{0}`")]
    Unknown(String),
    #[error("scheme `{scheme}` needs --{param}")]
    Missing { scheme: &'static str, param: &'static str },
    #[error("{0}")]
    Formula(String),
}

fn need<T: Copy>(v: Option<T>, scheme: &'static str, param: &'static str) -> Result<T, SchemeSpecError> {
    v.ok_or(SchemeSpecError::Missing { scheme, param })
}

fn sentence(p: &SchemeParams, scheme: &'static str) -> Result<Sentence, SchemeSpecError> {
    let text = p.formula.as_deref().ok_or(SchemeSpecError::Missing { scheme, param: "formula" })?;
    Sentence::parse(text).map_err(|e| SchemeSpecError::Formula(e.to_string()))
}

pub fn build_scheme(name: &str, p: &SchemeParams) -> Result<Box<dyn Scheme + Send>, SchemeSpecError> {
    Ok(match name {
        "st" => Box::new(match p.root {
            Some(r) => SpanningTreeScheme::rooted_at(NodeId(r)),
            None => SpanningTreeScheme::default(),
        }),
        "count" => Box::new(CountScheme { expected: p.expected }),
        "efo" => Box::new(
            ExistentialFoScheme::new(&sentence(p, "efo")?).map_err(|e| SchemeSpecError::Formula(e.to_string()))?,
        ),
        "fo2" => {
            Box::new(Depth2Scheme::new(&sentence(p, "fo2")?).map_err(|e| SchemeSpecError::Formula(e.to_string()))?)
        }
        "td" => Box::new(TreedepthScheme { t: need(p.t, "td", "t")? }),
        "kernel" => Box::new(KernelScheme { k: need(p.k, "kernel", "k")?, t: need(p.t, "kernel", "t")? }),
        "fo-td" => Box::new(FoTreedepthScheme::new(&sentence(p, "fo-td")?, need(p.t, "fo-td", "t")?)),
        other => return Err(SchemeSpecError::Unknown(other.to_string())),
    })
}
