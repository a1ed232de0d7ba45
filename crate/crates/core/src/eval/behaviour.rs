use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Axis, Condition, EyeSequence, FrameGeometry};
use crate::series::{frame_series, grand_mean, Preprocessing, TimeSeries};

type Quantity = fn(&FrameGeometry) -> f64;

/// Per-frame quantities plotted by the behavioural analysis, with the CSV
/// stem each one is written under.
pub const QUANTITIES: [(&str, Quantity); 10] = [
    ("pupil_radius_x", |f| f.pupil_r(Axis::X)),
    ("pupil_radius_y", |f| f.pupil_r(Axis::Y)),
    ("iris_radius_x", |f| f.iris_r(Axis::X)),
    ("iris_radius_y", |f| f.iris_r(Axis::Y)),
    ("ratio_x", |f| f.pupil_r(Axis::X) / f.iris_r(Axis::X)),
    ("ratio_y", |f| f.pupil_r(Axis::Y) / f.iris_r(Axis::Y)),
    ("pupil_centre_distance", |f| f.pupil_cx.hypot(f.pupil_cy)),
    ("iris_centre_distance", |f| f.iris_cx.hypot(f.iris_cy)),
    ("pupil_centre_x", |f| f.pupil_cx),
    ("pupil_centre_y", |f| f.pupil_cy),
];

fn usable(f: &FrameGeometry) -> bool {
    f.valid && f.iris_rx > 0.0 && f.iris_ry > 0.0
}

/// Grand-mean curve of one quantity for every condition, in class order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Figure {
    pub name: String,
    pub curves: Vec<TimeSeries>,
}

impl Figure {
    pub fn curve(&self, condition: Condition) -> &TimeSeries {
        &self.curves[condition.index()]
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["t".to_string()];
        header.extend(Condition::ALL.iter().map(|c| c.to_string()));
        let csv_err = |e: csv::Error| Error::Parse {
            path: PathBuf::from(format!("{}.csv", self.name)),
            line: 0,
            message: e.to_string(),
        };
        w.write_record(&header).map_err(csv_err)?;
        let first = &self.curves[0];
        for i in 0..first.len() {
            let mut row = vec![first.time(i).to_string()];
            row.extend(
                self.curves
                    .iter()
                    .map(|c| if c.mask[i] { c.values[i].to_string() } else { String::new() }),
            );
            w.write_record(&row).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| csv_err(e.into_error().into()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviouralAnalysis {
    pub figures: Vec<Figure>,
    /// Mean over sequences of the RMS distance of the pupil centre from its
    /// own mean position, per condition.
    pub centre_dispersion: Vec<f64>,
    /// Sequences per condition that entered the curves.
    pub support: Vec<usize>,
    pub skipped: usize,
}

impl BehaviouralAnalysis {
    pub fn figure(&self, name: &str) -> Option<&Figure> {
        self.figures.iter().find(|f| f.name == name)
    }

    pub fn control_dispersion_smallest(&self) -> bool {
        let c = self.centre_dispersion[Condition::Control.index()];
        self.centre_dispersion[1..].iter().all(|&d| c < d)
    }

    /// Writes one CSV per figure and `behaviour.json` with the dispersion
    /// summary. Returns the written paths.
    pub fn write(&self, out_dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
        let dir = out_dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut written = Vec::with_capacity(self.figures.len() + 1);
        for fig in &self.figures {
            let path = dir.join(format!("{}.csv", fig.name));
            fs::write(&path, fig.to_csv()?).map_err(|e| Error::io(&path, e))?;
            written.push(path);
        }
        let summary = Summary {
            conditions: Condition::ALL.to_vec(),
            support: self.support.clone(),
            skipped: self.skipped,
            centre_dispersion: self.centre_dispersion.clone(),
            control_dispersion_smallest: self.control_dispersion_smallest(),
        };
        let path = dir.join("behaviour.json");
        crate::io::save_json(&path, &summary)?;
        written.push(path);
        Ok(written)
    }
}

#[derive(Serialize)]
struct Summary {
    conditions: Vec<Condition>,
    support: Vec<usize>,
    skipped: usize,
    centre_dispersion: Vec<f64>,
    control_dispersion_smallest: bool,
}

fn centre_dispersion(seq: &EyeSequence) -> Option<f64> {
    let pts: Vec<(f64, f64)> = seq
        .frames
        .iter()
        .filter(|f| usable(f))
        .map(|f| (f.pupil_cx, f.pupil_cy))
        .collect();
    if pts.is_empty() {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    Some((pts.iter().map(|p| (p.0 - mx).powi(2) + (p.1 - my).powi(2)).sum::<f64>() / n).sqrt())
}

struct Processed {
    condition: Condition,
    series: Vec<TimeSeries>,
    dispersion: f64,
}

fn process(seq: &EyeSequence, prep: &Preprocessing) -> Option<Processed> {
    let series = QUANTITIES
        .iter()
        .map(|(_, q)| prep.apply(&frame_series(seq, q, usable).ok()?).ok())
        .collect::<Option<Vec<_>>>()?;
    Some(Processed {
        condition: seq.condition,
        series,
        dispersion: centre_dispersion(seq)?,
    })
}

/// Per-condition grand-mean curves of every quantity in [`QUANTITIES`] after
/// the standard preprocessing. Sequences that fail preprocessing are
/// skipped; every condition needs at least one usable sequence.
pub fn behavioural_analysis(sequences: &[EyeSequence], prep: &Preprocessing) -> Result<BehaviouralAnalysis> {
    let processed: Vec<Option<Processed>> = sequences.par_iter().map(|s| process(s, prep)).collect();
    let skipped = processed.iter().filter(|p| p.is_none()).count();
    let mut by_class: Vec<Vec<&Processed>> = vec![Vec::new(); Condition::COUNT];
    for p in processed.iter().flatten() {
        by_class[p.condition.index()].push(p);
    }
    if let Some(k) = by_class.iter().position(Vec::is_empty) {
        return Err(Error::Empty(format!("{} sequences for behavioural analysis", Condition::ALL[k])));
    }
    let mut figures = Vec::with_capacity(QUANTITIES.len());
    for (q, (name, _)) in QUANTITIES.iter().enumerate() {
        let curves = by_class
            .iter()
            .map(|members| grand_mean(&members.iter().map(|p| &p.series[q]).collect::<Vec<_>>()))
            .collect::<Result<Vec<_>>>()?;
        figures.push(Figure {
            name: name.to_string(),
            curves,
        });
    }
    let centre_dispersion = by_class
        .iter()
        .map(|m| {
            let mut d: Vec<f64> = m.iter().map(|p| p.dispersion).collect();
            d.sort_by(f64::total_cmp);
            d.iter().sum::<f64>() / d.len() as f64
        })
        .collect();
    Ok(BehaviouralAnalysis {
        figures,
        centre_dispersion,
        support: by_class.iter().map(Vec::len).collect(),
        skipped,
    })
}

/// [`behavioural_analysis`] followed by [`BehaviouralAnalysis::write`].
pub fn behavioural_report(
    sequences: &[EyeSequence],
    prep: &Preprocessing,
    out_dir: impl AsRef<Path>,
) -> Result<BehaviouralAnalysis> {
    let analysis = behavioural_analysis(sequences, prep)?;
    analysis.write(out_dir)?;
    Ok(analysis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Eye;

    fn seq(id: &str, condition: Condition, pupil: f64, centre: (f64, f64), n: usize) -> EyeSequence {
        let frames = (0..n)
            .map(|i| FrameGeometry {
                t: i as f64 / 15.0,
                pupil_rx: pupil,
                pupil_ry: pupil,
                iris_rx: 40.0,
                iris_ry: 40.0,
                pupil_cx: centre.0,
                pupil_cy: centre.1,
                iris_cx: centre.0,
                iris_cy: centre.1,
                valid: true,
            })
            .collect();
        EyeSequence {
            id: id.into(),
            eye: Eye::Left,
            condition,
            fps: 15.0,
            frames,
        }
    }

    fn corpus() -> Vec<EyeSequence> {
        Condition::ALL
            .iter()
            .enumerate()
            .flat_map(|(k, &c)| {
                [
                    seq(&format!("{c}a"), c, 10.0 + k as f64, (3.0, 4.0), 150),
                    seq(&format!("{c}b"), c, 12.0 + k as f64, (3.0, 4.0), 150),
                ]
            })
            .collect()
    }

    #[test]
    fn grand_means_match_hand_values() {
        let a = behavioural_analysis(&corpus(), &Preprocessing::default()).unwrap();
        assert_eq!(a.support, vec![2; 4]);
        let pupil = a.figure("pupil_radius_x").unwrap();
        for (k, c) in Condition::ALL.iter().enumerate() {
            assert!(pupil.curve(*c).values.iter().all(|&v| v == 11.0 + k as f64));
        }
        let ratio = a.figure("ratio_x").unwrap();
        assert!(ratio.curve(Condition::Drug).values.iter().all(|&v| (v - 13.0 / 40.0).abs() < 1e-15));
    }

    #[test]
    fn three_four_five() {
        let a = behavioural_analysis(&corpus(), &Preprocessing::default()).unwrap();
        for name in ["pupil_centre_distance", "iris_centre_distance"] {
            for c in &a.figure(name).unwrap().curves {
                assert!(c.values.iter().all(|&v| v == 5.0));
            }
        }
        assert_eq!(a.centre_dispersion, vec![0.0; 4]);
    }

    #[test]
    fn missing_class_is_an_error() {
        let seqs: Vec<_> = corpus().into_iter().filter(|s| s.condition != Condition::Sleep).collect();
        assert!(matches!(
            behavioural_analysis(&seqs, &Preprocessing::default()),
            Err(Error::Empty(m)) if m.contains("sleep")
        ));
    }

    #[test]
    fn writes_csv_per_figure() {
        let dir = tempfile::tempdir().unwrap();
        let a = behavioural_report(&corpus(), &Preprocessing::default(), dir.path()).unwrap();
        let files = a.write(dir.path()).unwrap();
        assert_eq!(files.len(), QUANTITIES.len() + 1);
        let text = fs::read_to_string(dir.path().join("ratio_x.csv")).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,control,alcohol,drug,sleep"));
        assert_eq!(lines.count(), 150);
    }
}
