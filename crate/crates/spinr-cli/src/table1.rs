use serde::Serialize;
use spinr::numlin::Tolerance;
use spinr::spaces::{build_model, AuxParam, MetricParams, ReductiveModel, SpaceId};
use spinr::spinorcalc::invariant_space;
use spinr::Result;
use std::time::Instant;

/// A configuration whose invariant space must come out empty.
#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub label: String,
    /// `None` when the auxiliary homomorphism fails to lift at all.
    pub dim: Option<usize>,
}

impl Certificate {
    pub fn holds(&self) -> bool {
        self.dim.map_or(true, |d| d == 0)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Table1Row {
    pub label: String,
    pub space: String,
    pub n: usize,
    pub r: usize,
    pub m: usize,
    pub dim: usize,
    pub expected: (usize, usize, usize),
    pub certificates: Vec<Certificate>,
    pub runtime_ms: u64,
}

impl Table1Row {
    pub fn matches(&self) -> bool {
        (self.r, self.m, self.dim) == self.expected && self.certificates.iter().all(Certificate::holds)
    }
}

struct RowSpec {
    label: &'static str,
    space: SpaceId,
    n: usize,
    aux: AuxParam,
    twist: Option<(usize, usize)>,
    expected: (usize, usize, usize),
    /// (label, aux, twist) of the configurations that must carry no invariants.
    refute: Vec<(&'static str, AuxParam, Option<(usize, usize)>)>,
}

fn specs() -> Vec<RowSpec> {
    use AuxParam::*;
    vec![
        RowSpec {
            label: "CP^2 hermitian",
            space: SpaceId::CpnHermitian,
            n: 2,
            aux: Charge(3),
            twist: None,
            expected: (2, 1, 2),
            refute: vec![("r=1", Trivial, None)],
        },
        RowSpec {
            label: "CP^3 hermitian",
            space: SpaceId::CpnHermitian,
            n: 3,
            aux: Charge(4),
            twist: None,
            expected: (2, 1, 2),
            refute: vec![("r=1", Trivial, None)],
        },
        RowSpec {
            label: "CP^3 symplectic",
            space: SpaceId::CpnSymplectic,
            n: 1,
            aux: Trivial,
            twist: None,
            expected: (1, 1, 2),
            refute: vec![],
        },
        RowSpec {
            label: "CP^5 symplectic",
            space: SpaceId::CpnSymplectic,
            n: 2,
            aux: Charge(-6),
            twist: None,
            expected: (2, 1, 2),
            refute: vec![("r=1", Trivial, None)],
        },
        RowSpec {
            label: "HP^3",
            space: SpaceId::Hpn,
            n: 3,
            aux: Nontrivial,
            twist: None,
            expected: (3, 3, 1),
            refute: vec![("r=1", Trivial, None), ("r=3 m=1", Nontrivial, Some((3, 1)))],
        },
        RowSpec {
            label: "HP^2",
            space: SpaceId::Hpn,
            n: 2,
            aux: Nontrivial,
            twist: Some((3, 1)),
            expected: (3, 1, 0),
            refute: vec![("r=3 m=3", Nontrivial, Some((3, 3))), ("r=3 m=5", Nontrivial, Some((3, 5)))],
        },
        RowSpec {
            label: "OP^2",
            space: SpaceId::Op2,
            n: 2,
            aux: Nontrivial,
            twist: None,
            expected: (9, 3, 4),
            refute: vec![("r=1", Trivial, None), ("r=9 m=1", Nontrivial, Some((9, 1)))],
        },
    ]
}

fn build(space: SpaceId, n: usize, aux: AuxParam, twist: Option<(usize, usize)>) -> Result<ReductiveModel> {
    let model = build_model(space, n, MetricParams::default(), aux)?;
    match twist {
        Some((r, m)) => model.with_twist(r, m),
        None => Ok(model),
    }
}

fn run_row(spec: &RowSpec, tol: &Tolerance) -> Result<Table1Row> {
    let start = Instant::now();
    let model = build(spec.space, spec.n, spec.aux, spec.twist)?;
    let dim = invariant_space(&model, tol)?.len();
    let mut certificates = Vec::new();
    for &(label, aux, twist) in &spec.refute {
        // A homomorphism without a lift refutes the configuration outright.
        let dim = match build(spec.space, spec.n, aux, twist) {
            Ok(m) => Some(invariant_space(&m, tol)?.len()),
            Err(spinr::Error::InvalidInput(_)) => None,
            Err(e) => return Err(e),
        };
        certificates.push(Certificate { label: label.to_string(), dim });
    }
    Ok(Table1Row {
        label: spec.label.to_string(),
        space: spec.space.to_string(),
        n: spec.n,
        r: model.r(),
        m: model.m_twists(),
        dim,
        expected: spec.expected,
        certificates,
        runtime_ms: start.elapsed().as_millis() as u64,
    })
}

/// Every row of the reproduction, in table order.
pub fn cmd_table1(tol: &Tolerance) -> Result<Vec<Table1Row>> {
    specs().iter().map(|s| run_row(s, tol)).collect()
}

pub fn markdown(rows: &[Table1Row]) -> String {
    let mut s = String::from("| space | n | r | m | dim | expected | minimality | ok | ms |\n|---|---|---|---|---|---|---|---|---|\n");
    for row in rows {
        let certs: Vec<String> = row
            .certificates
            .iter()
            .map(|c| format!("{}: {}", c.label, c.dim.map_or("no lift".to_string(), |d| format!("dim {d}"))))
            .collect();
        let (er, em, ed) = row.expected;
        s.push_str(&format!(
            "| {} | {} | {} | {} | {} | ({er}, {em}, {ed}) | {} | {} | {} |\n",
            row.label,
            row.n,
            row.r,
            row.m,
            row.dim,
            if certs.is_empty() { "-".to_string() } else { certs.join("; ") },
            if row.matches() { "yes" } else { "NO" },
            row.runtime_ms
        ));
    }
    s
}
