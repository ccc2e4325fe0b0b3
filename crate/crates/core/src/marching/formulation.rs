//! Catalogue of boundary integral formulations as block recipes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tdkernels::{PotentialKind, Trace};

/// Shear moduli and densities of the exterior (index 0) and interior (index 1) media.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Materials {
    pub s: [f64; 2],
    pub rho: [f64; 2],
}

impl Materials {
    pub fn new(s1: f64, rho1: f64, s2: f64, rho2: f64) -> Result<Self> {
        let m = Materials {
            s: [s1, s2],
            rho: [rho1, rho2],
        };
        if m.s.iter().chain(&m.rho).any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::Config(format!(
                "material constants must be positive, got s = {:?}, rho = {:?}",
                m.s, m.rho
            )));
        }
        Ok(m)
    }

    /// Unit exterior medium, used by the Dirichlet problems.
    pub fn unit() -> Self {
        Materials {
            s: [1.0, 1.0],
            rho: [1.0, 1.0],
        }
    }

    /// `s1 = rho1 = 1`, `s2 = 0.2`, `rho2 = 0.37`.
    pub fn default_transmission() -> Self {
        Materials {
            s: [1.0, 0.2],
            rho: [1.0, 0.37],
        }
    }

    pub fn speed(&self, domain: usize) -> f64 {
        (self.s[domain] / self.rho[domain]).sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Formulation {
    Out1,
    Out2,
    Out2_5,
    Out3,
    Out4 { alpha: f64 },
    Pmchwt,
    Mueller,
    Bm,
    Standard,
    PmchwtMod,
    MuellerMod,
    BmMod,
    StandardMod,
}

/// One operator contribution of a recipe.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum TermKind {
    Potential(PotentialKind),
    /// multiple of the identity
    Identity,
    /// multiple of the identity applied to the time derivative of the unknown
    IdentityRate,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub kind: TermKind,
    /// 0 for the exterior medium, 1 for the interior
    pub domain: usize,
    pub coeff: f64,
    pub row: usize,
    pub col: usize,
}

/// Right-hand side of one equation as a combination of incident data.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RhsRow {
    pub u: f64,
    pub udot: f64,
    pub dudn: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Recipe {
    pub formulation: Formulation,
    pub terms: Vec<Term>,
    pub rhs: Vec<RhsRow>,
}

impl Recipe {
    pub fn size(&self) -> usize {
        self.rhs.len()
    }

    /// Same operator with every trace written as its average plus an identity.
    pub fn expanded(&self) -> Recipe {
        let mut terms = Vec::with_capacity(self.terms.len() * 2);
        for t in &self.terms {
            if let TermKind::Potential(k) = t.kind {
                let jump = k.jump();
                terms.push(Term {
                    kind: TermKind::Potential(k.averaged()),
                    ..*t
                });
                if jump != 0.0 {
                    terms.push(Term {
                        kind: TermKind::Identity,
                        coeff: t.coeff * jump,
                        ..*t
                    });
                }
            } else {
                terms.push(*t);
            }
        }
        Recipe {
            formulation: self.formulation,
            terms,
            rhs: self.rhs.clone(),
        }
    }

    pub fn potentials(&self) -> impl Iterator<Item = (PotentialKind, usize)> + '_ {
        self.terms.iter().filter_map(|t| match t.kind {
            TermKind::Potential(k) => Some((k, t.domain)),
            _ => None,
        })
    }
}

fn pot(kind: PotentialKind, domain: usize, coeff: f64, row: usize, col: usize) -> Term {
    Term {
        kind: TermKind::Potential(kind),
        domain,
        coeff,
        row,
        col,
    }
}

fn ident(coeff: f64, row: usize, col: usize) -> Term {
    Term {
        kind: TermKind::Identity,
        domain: 0,
        coeff,
        row,
        col,
    }
}

impl Formulation {
    pub const DIRICHLET: [Formulation; 5] = [
        Formulation::Out1,
        Formulation::Out2,
        Formulation::Out2_5,
        Formulation::Out3,
        Formulation::Out4 { alpha: 1.0 },
    ];

    pub const TRANSMISSION: [Formulation; 8] = [
        Formulation::Pmchwt,
        Formulation::Mueller,
        Formulation::Bm,
        Formulation::Standard,
        Formulation::PmchwtMod,
        Formulation::MuellerMod,
        Formulation::BmMod,
        Formulation::StandardMod,
    ];

    pub const MODIFIED: [Formulation; 4] = [
        Formulation::PmchwtMod,
        Formulation::MuellerMod,
        Formulation::BmMod,
        Formulation::StandardMod,
    ];

    pub fn is_transmission(&self) -> bool {
        !matches!(
            self,
            Formulation::Out1
                | Formulation::Out2
                | Formulation::Out2_5
                | Formulation::Out3
                | Formulation::Out4 { .. }
        )
    }

    /// Modified formulations march on `(du/dt, q)` rather than `(u, q)`.
    pub fn is_modified(&self) -> bool {
        matches!(
            self,
            Formulation::PmchwtMod
                | Formulation::MuellerMod
                | Formulation::BmMod
                | Formulation::StandardMod
        )
    }

    pub fn unknowns(&self) -> &'static [&'static str] {
        if !self.is_transmission() {
            &["q"]
        } else if self.is_modified() {
            &["udot", "q"]
        } else {
            &["u", "q"]
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Formulation::Out1 => "out1",
            Formulation::Out2 => "out2",
            Formulation::Out2_5 => "out2_5",
            Formulation::Out3 => "out3",
            Formulation::Out4 { .. } => "out4",
            Formulation::Pmchwt => "pmchwt",
            Formulation::Mueller => "mueller",
            Formulation::Bm => "bm",
            Formulation::Standard => "standard",
            Formulation::PmchwtMod => "pmchwt_mod",
            Formulation::MuellerMod => "mueller_mod",
            Formulation::BmMod => "bm_mod",
            Formulation::StandardMod => "standard_mod",
        }
    }

    /// Operator blocks exactly as displayed, with traces kept explicit.
    pub fn recipe(&self, mat: &Materials) -> Recipe {
        use PotentialKind::*;
        let avg = Trace::Average;
        let (s1, s2) = (mat.s[0], mat.s[1]);
        let c1 = mat.speed(0);
        let modified = self.is_modified();
        // single-layer and hypersingular kinds differ between ordinary and modified
        let single = if modified { SDot } else { S };
        let hyper = if modified { M } else { N };
        let first_u = |r: RhsRow| -> RhsRow {
            if modified {
                RhsRow {
                    u: 0.0,
                    udot: r.u,
                    ..r
                }
            } else {
                r
            }
        };
        let (terms, rhs) = match self {
            Formulation::Out1 => (vec![pot(S, 0, 1.0, 0, 0)], vec![RhsRow { u: 1.0, ..Default::default() }]),
            Formulation::Out2 => (vec![pot(SDot, 0, 1.0, 0, 0)], vec![RhsRow { udot: 1.0, ..Default::default() }]),
            Formulation::Out2_5 => (
                vec![pot(DT(Trace::Minus), 0, 1.0, 0, 0)],
                vec![RhsRow { dudn: 1.0, ..Default::default() }],
            ),
            Formulation::Out3 => (
                vec![pot(DT(Trace::Minus), 0, 1.0, 0, 0), pot(SDot, 0, 1.0 / c1, 0, 0)],
                vec![RhsRow { dudn: 1.0, udot: 1.0 / c1, u: 0.0 }],
            ),
            Formulation::Out4 { alpha } => (
                vec![
                    pot(DT(Trace::Minus), 0, 1.0, 0, 0),
                    pot(SDot, 0, 1.0 / c1, 0, 0),
                    pot(S, 0, *alpha, 0, 0),
                ],
                vec![RhsRow { dudn: 1.0, udot: 1.0 / c1, u: *alpha }],
            ),
            Formulation::Pmchwt | Formulation::PmchwtMod => (
                vec![
                    pot(D(avg), 0, -1.0, 0, 0),
                    pot(D(avg), 1, -1.0, 0, 0),
                    pot(single, 0, 1.0 / s1, 0, 1),
                    pot(single, 1, 1.0 / s2, 0, 1),
                    pot(hyper, 0, -s1, 1, 0),
                    pot(hyper, 1, -s2, 1, 0),
                    pot(DT(avg), 0, 1.0, 1, 1),
                    pot(DT(avg), 1, 1.0, 1, 1),
                ],
                vec![
                    first_u(RhsRow { u: 1.0, ..Default::default() }),
                    RhsRow { dudn: s1, ..Default::default() },
                ],
            ),
            Formulation::Mueller | Formulation::MuellerMod => (
                vec![
                    ident((s1 + s2) / 2.0, 0, 0),
                    pot(D(avg), 0, -s1, 0, 0),
                    pot(D(avg), 1, s2, 0, 0),
                    pot(single, 0, 1.0, 0, 1),
                    pot(single, 1, -1.0, 0, 1),
                    pot(hyper, 0, -1.0, 1, 0),
                    pot(hyper, 1, 1.0, 1, 0),
                    ident((s1 + s2) / (2.0 * s1 * s2), 1, 1),
                    pot(DT(avg), 0, 1.0 / s1, 1, 1),
                    pot(DT(avg), 1, -1.0 / s2, 1, 1),
                ],
                vec![
                    first_u(RhsRow { u: s1, ..Default::default() }),
                    RhsRow { dudn: 1.0, ..Default::default() },
                ],
            ),
            Formulation::Bm | Formulation::BmMod => {
                let mut row0 = if modified {
                    vec![
                        ident(1.0 / (2.0 * c1), 0, 0),
                        pot(M, 0, -1.0, 0, 0),
                        pot(D(avg), 0, -1.0 / c1, 0, 0),
                    ]
                } else {
                    vec![
                        Term {
                            kind: TermKind::IdentityRate,
                            domain: 0,
                            coeff: 1.0 / (2.0 * c1),
                            row: 0,
                            col: 0,
                        },
                        pot(N, 0, -1.0, 0, 0),
                        pot(DDot, 0, -1.0 / c1, 0, 0),
                    ]
                };
                row0.extend([
                    ident(1.0 / (2.0 * s1), 0, 1),
                    pot(DT(avg), 0, 1.0 / s1, 0, 1),
                    pot(SDot, 0, 1.0 / (c1 * s1), 0, 1),
                    ident(-0.5, 1, 0),
                    pot(D(avg), 1, -1.0, 1, 0),
                    pot(single, 1, 1.0 / s2, 1, 1),
                ]);
                (
                    row0,
                    vec![
                        RhsRow { dudn: 1.0, udot: 1.0 / c1, u: 0.0 },
                        RhsRow::default(),
                    ],
                )
            }
            Formulation::Standard | Formulation::StandardMod => (
                vec![
                    ident(0.5, 0, 0),
                    pot(D(avg), 0, -1.0, 0, 0),
                    pot(single, 0, 1.0 / s1, 0, 1),
                    ident(0.5, 1, 0),
                    pot(D(avg), 1, 1.0, 1, 0),
                    pot(single, 1, -1.0 / s2, 1, 1),
                ],
                vec![first_u(RhsRow { u: 1.0, ..Default::default() }), RhsRow::default()],
            ),
        };
        Recipe {
            formulation: *self,
            terms,
            rhs,
        }
    }
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formulation::Out4 { alpha } if *alpha != 1.0 => write!(f, "out4({alpha})"),
            other => f.write_str(other.name()),
        }
    }
}

impl FromStr for Formulation {
    type Err = Error;

    /// Accepts the lower-case names, with `out4` optionally written `out4(alpha)`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase().replace('-', "_");
        if let Some(inner) = t.strip_prefix("out4(").and_then(|r| r.strip_suffix(')')) {
            let alpha = inner
                .parse()
                .map_err(|_| Error::Parse(format!("bad out4 coupling `{inner}`")))?;
            return Ok(Formulation::Out4 { alpha });
        }
        let f = match t.as_str() {
            "out1" => Formulation::Out1,
            "out2" => Formulation::Out2,
            "out2_5" | "out2.5" => Formulation::Out2_5,
            "out3" => Formulation::Out3,
            "out4" => Formulation::Out4 { alpha: 1.0 },
            "pmchwt" => Formulation::Pmchwt,
            "mueller" | "muller" => Formulation::Mueller,
            "bm" => Formulation::Bm,
            "standard" => Formulation::Standard,
            "pmchwt_mod" => Formulation::PmchwtMod,
            "mueller_mod" | "muller_mod" => Formulation::MuellerMod,
            "bm_mod" => Formulation::BmMod,
            "standard_mod" => Formulation::StandardMod,
            _ => return Err(Error::Parse(format!("unknown formulation `{s}`"))),
        };
        Ok(f)
    }
}
