use serde::{Deserialize, Serialize};

use crate::cftdata::Speed;
use crate::combinatorics::ArcDiagram;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContourKind {
    /// A curve from one endpoint to the other, usable when both endpoint
    /// powers exceed `-1`.
    SimpleBent,
    /// A double loop entwining both endpoints.
    Pochhammer,
}

/// One integration contour with one-based endpoints `a < b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contour {
    pub kind: ContourKind,
    pub endpoints: (usize, usize),
}

impl Contour {
    /// Whether `other` lies strictly inside this contour's interval.
    pub fn encloses(&self, other: &Contour) -> bool {
        self.endpoints.0 < other.endpoints.0 && other.endpoints.1 < self.endpoints.1
    }

    pub fn encloses_point(&self, i: usize) -> bool {
        self.endpoints.0 < i && i < self.endpoints.1
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContourPlan {
    pub contours: Vec<Contour>,
    /// `nesting[m]` lists the contours strictly inside contour `m`.
    pub nesting: Vec<Vec<usize>>,
}

impl ContourPlan {
    pub fn len(&self) -> usize {
        self.contours.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contours.is_empty()
    }

    pub fn is_nested(&self) -> bool {
        self.nesting.iter().any(|v| !v.is_empty())
    }
}

/// Contours on every arc of `diagram` except the one ending at `conjugate`.
pub fn plan_contours(diagram: &ArcDiagram, conjugate: usize, kappa: Speed) -> Result<ContourPlan> {
    let points = diagram.n_points();
    if conjugate == 0 || conjugate > points {
        return Err(Error::IndexOutOfRange { index: conjugate, points });
    }
    let kind = if kappa.value() > 4.0 { ContourKind::SimpleBent } else { ContourKind::Pochhammer };
    let contours: Vec<Contour> = diagram
        .arcs()
        .filter(|&(a, b)| a != conjugate && b != conjugate)
        .map(|endpoints| Contour { kind, endpoints })
        .collect();
    let nesting = contours
        .iter()
        .map(|outer| (0..contours.len()).filter(|&k| outer.encloses(&contours[k])).collect())
        .collect();
    Ok(ContourPlan { contours, nesting })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plan_examples() {
        let k = Speed::new(5.0).unwrap();
        let d: ArcDiagram = "2 1 4 3".parse().unwrap();
        let p = plan_contours(&d, 4, k).unwrap();
        assert_eq!(p.contours.len(), 1);
        assert_eq!(p.contours[0].endpoints, (1, 2));
        assert_eq!(p.contours[0].kind, ContourKind::SimpleBent);

        let d: ArcDiagram = "2 1".parse().unwrap();
        assert!(plan_contours(&d, 2, k).unwrap().is_empty());

        let d: ArcDiagram = "4 3 2 1 6 5".parse().unwrap();
        let p = plan_contours(&d, 6, Speed::new(3.0).unwrap()).unwrap();
        let ends: Vec<_> = p.contours.iter().map(|c| c.endpoints).collect();
        assert_eq!(ends, vec![(1, 4), (2, 3)]);
        assert_eq!(p.nesting, vec![vec![1], vec![]]);
        assert!(p.contours.iter().all(|c| c.kind == ContourKind::Pochhammer));
    }
}
