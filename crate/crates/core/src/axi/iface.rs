// SPDX-License-Identifier: Apache-2.0

//! Interface inference: which parameters become AXI4 master bundles.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::frontend::typed::ParamType;
use crate::frontend::TypedProgram;
use crate::middle::{Backing, Cdfg, MemKind};

use super::AxiError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParamIface {
    ScalarPort,
    AxiMaster { bundle: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IfaceParam {
    pub name: String,
    pub kind: ParamIface,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundleSpec {
    pub id: u32,
    /// Data bus width in bits: 32 or 64.
    pub data_width: u32,
    pub id_width: u32,
    pub params: Vec<String>,
    pub shared: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct InterfaceSpec {
    pub params: Vec<IfaceParam>,
    pub bundles: Vec<BundleSpec>,
}

impl InterfaceSpec {
    pub fn bundle_of(&self, param: &str) -> Option<u32> {
        self.params.iter().find(|p| p.name == param).and_then(|p| match p.kind {
            ParamIface::AxiMaster { bundle } => Some(bundle),
            ParamIface::ScalarPort => None,
        })
    }

    pub fn bus_bytes(&self, bundle: u32) -> u32 {
        self.bundles.iter().find(|b| b.id == bundle).map_or(4, |b| b.data_width / 8)
    }
}

/// The `interface { … }` section of a tool configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterfaceConfig {
    /// Explicit `p: axi(bundle=N)` requests.
    pub assign: Vec<(String, u32)>,
    /// `share(p, q, …)` groups.
    pub shares: Vec<Vec<String>>,
    pub bus_width: u32,
}

impl Default for InterfaceConfig {
    fn default() -> Self {
        InterfaceConfig {
            assign: Vec::new(),
            shares: Vec::new(),
            bus_width: 32,
        }
    }
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while parent[r] != r {
        r = parent[r];
    }
    let mut c = x;
    while parent[c] != r {
        let n = parent[c];
        parent[c] = r;
        c = n;
    }
    r
}

/// Default policy: every array parameter gets a bundle of its own. The
/// configuration may pin bundle numbers and merge parameters; bundle ids are
/// renumbered densely, ordered by requested id and then by first parameter.
pub fn infer_interfaces(prog: &TypedProgram, cfg: Option<&InterfaceConfig>) -> Result<InterfaceSpec, AxiError> {
    let default = InterfaceConfig::default();
    let cfg = cfg.unwrap_or(&default);
    if cfg.bus_width != 32 && cfg.bus_width != 64 {
        return Err(AxiError::Config(format!("bus width must be 32 or 64, got {}", cfg.bus_width)));
    }
    let params: Vec<(String, ParamType)> = prog.top_function().param_types().map(|(n, t)| (n.to_string(), t)).collect();
    let index = |name: &str| -> Result<usize, AxiError> {
        let i = params
            .iter()
            .position(|(n, _)| n == name)
            .ok_or_else(|| AxiError::Config(format!("unknown parameter {name} in interface config")))?;
        if let ParamType::Scalar(_) = params[i].1 {
            return Err(AxiError::Config(format!("scalar parameter {name} cannot map to a bundle")));
        }
        Ok(i)
    };
    let mut parent: Vec<usize> = (0..params.len()).collect();
    for group in &cfg.shares {
        let mut ids = Vec::new();
        for n in group {
            ids.push(index(n)?);
        }
        for w in ids.windows(2) {
            let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut pinned: BTreeMap<usize, u32> = BTreeMap::new();
    for (n, id) in &cfg.assign {
        let r = find(&mut parent, index(n)?);
        if let Some(&old) = pinned.get(&r) {
            if old != *id {
                return Err(AxiError::Config(format!("parameter {n} pinned to bundles {old} and {id}")));
            }
        }
        pinned.insert(r, *id);
    }
    // groups keyed by root, sorted by (pinned id, first member)
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, (_, t)) in params.iter().enumerate() {
        if let ParamType::ArrayRef(_) = t {
            let r = find(&mut parent, i);
            groups.entry(r).or_default().push(i);
        }
    }
    let mut order: Vec<(u32, usize, Vec<usize>)> = groups
        .into_iter()
        .map(|(r, m)| (pinned.get(&r).copied().unwrap_or(u32::MAX), m[0], m))
        .collect();
    order.sort();
    let mut spec = InterfaceSpec::default();
    let mut bundle_of = vec![None; params.len()];
    for (id, (_, _, members)) in order.iter().enumerate() {
        for &m in members {
            bundle_of[m] = Some(id as u32);
        }
        spec.bundles.push(BundleSpec {
            id: id as u32,
            data_width: cfg.bus_width,
            id_width: 1,
            params: members.iter().map(|&m| params[m].0.clone()).collect(),
            shared: members.len() > 1,
        });
    }
    for (i, (n, _)) in params.iter().enumerate() {
        spec.params.push(IfaceParam {
            name: n.clone(),
            kind: match bundle_of[i] {
                Some(bundle) => ParamIface::AxiMaster { bundle },
                None => ParamIface::ScalarPort,
            },
        });
    }
    Ok(spec)
}

/// Tags every external memory object of `g` with its bundle.
pub fn apply_interfaces(g: &mut Cdfg, spec: &InterfaceSpec) {
    for m in &mut g.mems {
        if let MemKind::External { param } = m.kind {
            if let ParamIface::AxiMaster { bundle } = spec.params[param as usize].kind {
                m.backing = Backing::Axi(bundle);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{check, SourceUnit};

    fn prog(src: &str) -> TypedProgram {
        check(&SourceUnit::new("i.c", src), "f").unwrap()
    }

    #[test]
    fn default_policy() {
        let s = infer_interfaces(&prog("void f(int a, int* b) { b[0] = a; }"), None).unwrap();
        assert_eq!(s.params[0].kind, ParamIface::ScalarPort);
        assert_eq!(s.params[1].kind, ParamIface::AxiMaster { bundle: 0 });
        assert_eq!(s.bundles.len(), 1);
    }

    #[test]
    fn shared_bundle() {
        let cfg = InterfaceConfig {
            shares: vec![vec!["p".into(), "q".into()]],
            ..Default::default()
        };
        let s = infer_interfaces(&prog("void f(int* p, int* q) { p[0] = q[0]; }"), Some(&cfg)).unwrap();
        assert_eq!(s.bundles.len(), 1);
        assert!(s.bundles[0].shared);
        assert_eq!(s.bundle_of("q"), Some(0));
    }

    #[test]
    fn scalar_cannot_share() {
        let cfg = InterfaceConfig {
            shares: vec![vec!["a".into(), "q".into()]],
            ..Default::default()
        };
        let e = infer_interfaces(&prog("void f(int a, int* q) { q[0] = a; }"), Some(&cfg)).unwrap_err();
        assert_eq!(e.to_string(), "interface config: scalar parameter a cannot map to a bundle");
        let cfg = InterfaceConfig {
            assign: vec![("zz".into(), 0)],
            ..Default::default()
        };
        assert!(infer_interfaces(&prog("void f(int* q) { q[0] = 1; }"), Some(&cfg)).is_err());
    }

    #[test]
    fn pinned_order() {
        let cfg = InterfaceConfig {
            assign: vec![("q".into(), 0), ("p".into(), 1)],
            ..Default::default()
        };
        let s = infer_interfaces(&prog("void f(int* p, int* q) { p[0] = q[0]; }"), Some(&cfg)).unwrap();
        assert_eq!((s.bundle_of("q"), s.bundle_of("p")), (Some(0), Some(1)));
    }
}
