//! Synthetic cooling-plant data with injected faults and known ground truth.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{SignalRef, SignalThreshold, DEFAULT_CONFIDENCE};
use crate::rootcause::{LookupEntry, LookupTable};
use crate::seed::derive_seed;
use crate::series::{RawRecord, SignalKind, SignalMeta, Timestamp};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Generator {
    /// `base + amplitude * sin(2*pi*t/period + phase)`, plus any further
    /// sinusoids in `harmonics`, plus Gaussian noise.
    Periodic {
        base: f64,
        amplitude: f64,
        period_seconds: f64,
        #[serde(default)]
        phase: f64,
        noise: f64,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        harmonics: Vec<Harmonic>,
    },
    /// Each sample is 1 with probability `rate`, else 0.
    BooleanAlarm { rate: f64 },
    /// Adds `increment` per sample, back to 0 at every multiple of
    /// `reset_seconds` (measured from the plant start).
    Counter { increment: u32, reset_seconds: i64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Harmonic {
    pub amplitude: f64,
    pub period_seconds: f64,
    #[serde(default)]
    pub phase: f64,
}

impl Generator {
    fn kind(&self) -> SignalKind {
        match self {
            Generator::Periodic { .. } => SignalKind::Numeric,
            Generator::BooleanAlarm { .. } => SignalKind::Boolean,
            Generator::Counter { increment, .. } => SignalKind::Counter {
                increment: *increment,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorSpec {
    pub name: String,
    pub generator: Generator,
    /// Mean seconds between two samples.
    pub mean_interval: f64,
    /// Relative jitter: each gap is `mean_interval * (1 + u)`, `u` uniform
    /// in `[-jitter, jitter]`, rounded and at least one second.
    pub jitter: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentSpec {
    pub name: String,
    /// Sensor ids (positions in `PlantSpec::sensors`).
    pub sensors: Vec<usize>,
    #[serde(default)]
    pub failure_type: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantSpec {
    pub start: Timestamp,
    pub duration_seconds: i64,
    pub components: Vec<ComponentSpec>,
    pub sensors: Vec<SensorSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaultKind {
    /// Adds `magnitude`.
    Step,
    /// Adds a ramp from 0 to `magnitude` over the fault window.
    Drift,
    /// Replaces the value with `magnitude`.
    StuckAt,
    /// Adds Gaussian noise with standard deviation `magnitude`.
    NoiseBurst,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultInjection {
    pub sensors: Vec<usize>,
    pub kind: FaultKind,
    /// Seconds after the plant start.
    pub start_offset: i64,
    pub duration_seconds: i64,
    pub magnitude: f64,
}

impl FaultInjection {
    fn window(&self, plant_start: Timestamp) -> (Timestamp, Timestamp) {
        let s = plant_start + self.start_offset;
        (s, s + self.duration_seconds)
    }
}

/// Absolute fault windows `[start, end)` with their target sensors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultWindow {
    pub start: Timestamp,
    pub end: Timestamp,
    pub sensors: Vec<usize>,
    pub kind: FaultKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub faults: Vec<FaultWindow>,
}

impl GroundTruth {
    /// Row `t` covers `[start + t*rate, start + (t+1)*rate)` and is true when
    /// that interval overlaps any fault window.
    pub fn labels(&self, start: Timestamp, rate_seconds: i64, rows: usize) -> Vec<bool> {
        (0..rows)
            .map(|t| {
                let a = start + t as i64 * rate_seconds;
                let b = a + rate_seconds;
                self.faults.iter().any(|f| f.start < b && a < f.end)
            })
            .collect()
    }

    /// Union of target sensors of the faults overlapping each row.
    pub fn affected(
        &self,
        start: Timestamp,
        rate_seconds: i64,
        rows: usize,
    ) -> Vec<BTreeSet<usize>> {
        (0..rows)
            .map(|t| {
                let a = start + t as i64 * rate_seconds;
                let b = a + rate_seconds;
                self.faults
                    .iter()
                    .filter(|f| f.start < b && a < f.end)
                    .flat_map(|f| f.sensors.iter().copied())
                    .collect()
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Simulation {
    pub signals: Vec<SignalMeta>,
    /// Sorted by timestamp, then signal.
    pub records: Vec<RawRecord>,
    pub truth: GroundTruth,
}

impl PlantSpec {
    pub fn end(&self) -> Timestamp {
        self.start + self.duration_seconds
    }

    pub fn validate(&self) -> Result<()> {
        if self.duration_seconds <= 0 {
            return Err(Error::config("plant duration must be positive"));
        }
        if self.sensors.is_empty() {
            return Err(Error::config("plant has no sensors"));
        }
        let mut owner = vec![None; self.sensors.len()];
        for (c, comp) in self.components.iter().enumerate() {
            for &s in &comp.sensors {
                let slot = owner.get_mut(s).ok_or_else(|| {
                    Error::config(format!(
                        "component '{}' lists unknown sensor {s}",
                        comp.name
                    ))
                })?;
                if slot.is_some() {
                    return Err(Error::config(format!(
                        "sensor {s} belongs to two components"
                    )));
                }
                *slot = Some(c);
            }
        }
        if let Some(s) = owner.iter().position(Option::is_none) {
            return Err(Error::config(format!(
                "sensor '{}' belongs to no component",
                self.sensors[s].name
            )));
        }
        let mut names = BTreeSet::new();
        for s in &self.sensors {
            if !names.insert(s.name.as_str()) {
                return Err(Error::DuplicateEntry(s.name.clone()));
            }
            if !(s.mean_interval >= 1.0 && s.mean_interval.is_finite()) {
                return Err(Error::config(format!(
                    "'{}': mean_interval must be >= 1 s",
                    s.name
                )));
            }
            if !(0.0..1.0).contains(&s.jitter) {
                return Err(Error::config(format!(
                    "'{}': jitter must be in [0, 1)",
                    s.name
                )));
            }
            match &s.generator {
                Generator::Periodic {
                    period_seconds,
                    noise,
                    harmonics,
                    ..
                } if !(*period_seconds > 0.0)
                    || !(*noise >= 0.0)
                    || harmonics.iter().any(|h| !(h.period_seconds > 0.0)) =>
                {
                    return Err(Error::config(format!(
                        "'{}': period must be positive, noise >= 0",
                        s.name
                    )));
                }
                Generator::BooleanAlarm { rate } if !(0.0..=1.0).contains(rate) => {
                    return Err(Error::config(format!(
                        "'{}': alarm rate must be in [0, 1]",
                        s.name
                    )));
                }
                Generator::Counter {
                    increment,
                    reset_seconds,
                } if *increment == 0 || *reset_seconds <= 0 => {
                    return Err(Error::config(format!(
                        "'{}': counter increment and reset period must be positive",
                        s.name
                    )));
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn signals(&self) -> Vec<SignalMeta> {
        self.sensors
            .iter()
            .enumerate()
            .map(|(i, s)| SignalMeta {
                id: i,
                name: s.name.clone(),
                kind: s.generator.kind(),
                unit: s.unit.clone(),
            })
            .collect()
    }

    /// Sensor to component table for root-cause analysis.
    pub fn lookup_table(&self) -> LookupTable {
        let mut table = LookupTable::new();
        for comp in &self.components {
            for &s in &comp.sensors {
                table
                    .insert(
                        self.sensors[s].name.clone(),
                        LookupEntry {
                            component: comp.name.clone(),
                            failure_type: comp.failure_type.clone(),
                            note: None,
                            extra: Default::default(),
                        },
                    )
                    .expect("validated: each sensor in one component");
            }
        }
        table
    }

    /// Label thresholds: statistical for numeric sensors, expert bounds for
    /// alarms (raised) and counters (above the largest value a healthy
    /// counter reaches).
    pub fn thresholds(&self) -> Vec<SignalThreshold> {
        self.sensors
            .iter()
            .map(|s| {
                let r = SignalRef::Name(s.name.clone());
                match &s.generator {
                    Generator::Periodic { .. } => {
                        SignalThreshold::statistical(r, DEFAULT_CONFIDENCE)
                    }
                    Generator::BooleanAlarm { .. } => SignalThreshold::expert(r, None, Some(0.5)),
                    Generator::Counter {
                        increment,
                        reset_seconds,
                    } => {
                        let max_samples =
                            *reset_seconds as f64 / (s.mean_interval * (1.0 - s.jitter)) + 1.0;
                        SignalThreshold::expert(
                            r,
                            Some(0.0),
                            Some(f64::from(*increment) * max_samples.ceil()),
                        )
                    }
                }
            })
            .collect()
    }
}

fn check_faults(spec: &PlantSpec, faults: &[FaultInjection]) -> Result<()> {
    for (k, f) in faults.iter().enumerate() {
        if f.sensors.is_empty() {
            return Err(Error::config(format!("fault {k} has no target sensor")));
        }
        if let Some(&s) = f.sensors.iter().find(|&&s| s >= spec.sensors.len()) {
            return Err(Error::config(format!(
                "fault {k} targets unknown sensor {s}"
            )));
        }
        if f.duration_seconds <= 0
            || f.start_offset < 0
            || f.start_offset + f.duration_seconds > spec.duration_seconds
        {
            return Err(Error::config(format!(
                "fault {k} lies outside the simulated span"
            )));
        }
        if !f.magnitude.is_finite() {
            return Err(Error::config(format!("fault {k} magnitude must be finite")));
        }
    }
    for (a, fa) in faults.iter().enumerate() {
        for (b, fb) in faults.iter().enumerate().skip(a + 1) {
            let (sa, ea) = fa.window(spec.start);
            let (sb, eb) = fb.window(spec.start);
            let shared = fa.sensors.iter().any(|s| fb.sensors.contains(s));
            if shared && sa < eb && sb < ea {
                return Err(Error::config(format!(
                    "faults {a} and {b} overlap in time on the same sensor"
                )));
            }
        }
    }
    Ok(())
}

fn base_value(
    gen: &Generator,
    spec_start: Timestamp,
    t: Timestamp,
    state: &mut f64,
    last_reset: &mut i64,
    rng: &mut ChaCha8Rng,
) -> f64 {
    match gen {
        Generator::Periodic {
            base,
            amplitude,
            period_seconds,
            phase,
            noise,
            harmonics,
        } => {
            let x = (t - spec_start) as f64;
            let wave = |a: f64, p: f64, ph: f64| a * (std::f64::consts::TAU * x / p + ph).sin();
            let n: f64 = rng.sample(StandardNormal);
            let extra: f64 = harmonics
                .iter()
                .map(|h| wave(h.amplitude, h.period_seconds, h.phase))
                .sum();
            base + wave(*amplitude, *period_seconds, *phase) + extra + noise * n
        }
        Generator::BooleanAlarm { rate } => f64::from(u8::from(rng.random::<f64>() < *rate)),
        Generator::Counter {
            increment,
            reset_seconds,
        } => {
            let cycle = (t - spec_start).div_euclid(*reset_seconds);
            if cycle != *last_reset {
                *last_reset = cycle;
                *state = 0.0;
            }
            *state += f64::from(*increment);
            *state
        }
    }
}

fn simulate_sensor(
    spec: &PlantSpec,
    id: usize,
    faults: &[(Timestamp, Timestamp, &FaultInjection)],
    seed: u64,
) -> Vec<RawRecord> {
    let sensor = &spec.sensors[id];
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[id as u64, 0]));
    // fault noise has its own stream so healthy stretches do not depend on faults
    let mut fault_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[id as u64, 1]));
    let mut out = Vec::new();
    let mut t = spec.start + rng.random_range(0.0..sensor.mean_interval).floor() as i64;
    let (mut counter, mut cycle) = (0.0, -1i64);
    let end = spec.end();
    while t < end {
        let mut v = base_value(
            &sensor.generator,
            spec.start,
            t,
            &mut counter,
            &mut cycle,
            &mut rng,
        );
        for &(fs, fe, f) in faults {
            if fs <= t && t < fe {
                v = match f.kind {
                    FaultKind::Step => v + f.magnitude,
                    FaultKind::Drift => v + f.magnitude * (t - fs) as f64 / (fe - fs) as f64,
                    FaultKind::StuckAt => f.magnitude,
                    FaultKind::NoiseBurst => {
                        let n: f64 = fault_rng.sample(StandardNormal);
                        v + f.magnitude * n
                    }
                };
            }
        }
        out.push(RawRecord {
            timestamp: t,
            signal: id,
            value: v,
        });
        let u: f64 = if sensor.jitter > 0.0 {
            rng.random_range(-sensor.jitter..=sensor.jitter)
        } else {
            0.0
        };
        let gap = (sensor.mean_interval * (1.0 + u)).round().max(1.0) as i64;
        t += gap;
    }
    out
}

/// Generates every sensor's record stream (in parallel; each sensor has its
/// own seeded stream, so the result equals a sequential run).
pub fn simulate(spec: &PlantSpec, faults: &[FaultInjection], seed: u64) -> Result<Simulation> {
    spec.validate()?;
    check_faults(spec, faults)?;
    let per_sensor: Vec<Vec<(Timestamp, Timestamp, &FaultInjection)>> = (0..spec.sensors.len())
        .map(|id| {
            faults
                .iter()
                .filter(|f| f.sensors.contains(&id))
                .map(|f| {
                    let (s, e) = f.window(spec.start);
                    (s, e, f)
                })
                .collect()
        })
        .collect();
    let streams: Vec<Vec<RawRecord>> = (0..spec.sensors.len())
        .into_par_iter()
        .map(|id| simulate_sensor(spec, id, &per_sensor[id], seed))
        .collect();
    let mut records: Vec<RawRecord> = streams.into_iter().flatten().collect();
    records.sort_by_key(|r| (r.timestamp, r.signal));
    let truth = GroundTruth {
        faults: faults
            .iter()
            .map(|f| {
                let (start, end) = f.window(spec.start);
                let mut sensors = f.sensors.clone();
                sensors.sort_unstable();
                sensors.dedup();
                FaultWindow {
                    start,
                    end,
                    sensors,
                    kind: f.kind,
                }
            })
            .collect(),
    };
    Ok(Simulation {
        signals: spec.signals(),
        records,
        truth,
    })
}

pub const DAY: i64 = 86_400;
pub const HOUR: i64 = 3_600;

/// 2024-01-01T00:00:00Z.
pub const MINI_PLANT_START: Timestamp = 1_704_067_200;

/// Twelve sensors in four components over fourteen days. Numeric sensors
/// follow daily or sub-daily cycles. Daily phases are spread over half a
/// cycle and the sub-daily periods (180, 47 and 70 minutes) do not lock, so
/// no sensor is a fixed function of another.
/// The two alarms stay low in healthy operation.
pub fn mini_plant() -> PlantSpec {
    let periodic = |name: &str,
                    base: f64,
                    amplitude: f64,
                    period: i64,
                    phase: f64,
                    noise: f64,
                    interval: f64| SensorSpec {
        name: name.into(),
        generator: Generator::Periodic {
            base,
            amplitude,
            period_seconds: period as f64,
            phase,
            noise,
            harmonics: vec![],
        },
        mean_interval: interval,
        jitter: 0.3,
        unit: None,
    };
    let alarm = |name: &str, rate: f64, interval: f64| SensorSpec {
        name: name.into(),
        generator: Generator::BooleanAlarm { rate },
        mean_interval: interval,
        jitter: 0.3,
        unit: None,
    };
    let sensors = vec![
        periodic("compressor_temp", 60.0, 5.0, DAY, 0.0, 3.0, 20.0),
        periodic("compressor_pressure", 12.0, 1.0, 3 * HOUR, 0.0, 0.05, 15.0),
        periodic("compressor_current", 30.0, 3.0, DAY, 1.05, 0.3, 30.0),
        periodic("condenser_temp", 35.0, 4.0, DAY, 0.52, 0.4, 20.0),
        periodic(
            "condenser_fan_speed",
            1200.0,
            100.0,
            47 * 60,
            2.0,
            10.0,
            25.0,
        ),
        alarm("condenser_alarm", 0.0, 30.0),
        periodic("evaporator_temp", -5.0, 2.0, DAY, 2.09, 0.2, 20.0),
        periodic("evaporator_pressure", 3.0, 0.3, 70 * 60, 0.7, 0.03, 15.0),
        SensorSpec {
            name: "defrost_counter".into(),
            generator: Generator::Counter {
                increment: 1,
                reset_seconds: 2 * HOUR,
            },
            mean_interval: 20.0,
            jitter: 0.2,
            unit: None,
        },
        periodic("room_temp", 2.0, 1.0, DAY, 1.57, 0.1, 30.0),
        alarm("room_alarm", 0.0, 30.0),
        periodic("room_humidity", 80.0, 6.0, DAY, 2.62, 0.6, 45.0),
    ];
    let component = |name: &str, sensors: Vec<usize>, failure: &str| ComponentSpec {
        name: name.into(),
        sensors,
        failure_type: failure.into(),
    };
    PlantSpec {
        start: MINI_PLANT_START,
        duration_seconds: 14 * DAY,
        components: vec![
            component("Component 1", vec![0, 1, 2], "1"),
            component("Component 2", vec![3, 4, 5], "2"),
            component("Component 3", vec![6, 7, 8], "3"),
            component("Component 4", vec![9, 10, 11], "4"),
        ],
        sensors,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preprocess::resample;

    fn constant_plant(noise: f64) -> PlantSpec {
        PlantSpec {
            start: 0,
            duration_seconds: 6 * HOUR,
            components: vec![ComponentSpec {
                name: "C".into(),
                sensors: vec![0, 1],
                failure_type: "1".into(),
            }],
            sensors: vec![
                SensorSpec {
                    name: "a".into(),
                    generator: Generator::Periodic {
                        base: 3.25,
                        amplitude: 0.0,
                        period_seconds: 100.0,
                        phase: 0.0,
                        noise,
                        harmonics: vec![],
                    },
                    mean_interval: 7.0,
                    jitter: 0.5,
                    unit: None,
                },
                SensorSpec {
                    name: "b".into(),
                    generator: Generator::Periodic {
                        base: -1.0,
                        amplitude: 2.0,
                        period_seconds: 600.0,
                        phase: 0.3,
                        noise,
                        harmonics: vec![],
                    },
                    mean_interval: 11.0,
                    jitter: 0.2,
                    unit: None,
                },
            ],
        }
    }

    fn step(sensors: Vec<usize>, start_offset: i64, duration: i64) -> FaultInjection {
        FaultInjection {
            sensors,
            kind: FaultKind::Step,
            start_offset,
            duration_seconds: duration,
            magnitude: 4.0,
        }
    }

    #[test]
    fn timestamps_strictly_increasing_per_sensor() {
        let sim = simulate(&mini_plant(), &[], 3).unwrap();
        for id in 0..12 {
            let ts: Vec<i64> = sim
                .records
                .iter()
                .filter(|r| r.signal == id)
                .map(|r| r.timestamp)
                .collect();
            assert!(ts.len() > 1000);
            assert!(ts.windows(2).all(|p| p[0] < p[1]));
            assert!(ts
                .iter()
                .all(|&t| (MINI_PLANT_START..MINI_PLANT_START + 14 * DAY).contains(&t)));
        }
    }

    #[test]
    fn no_faults_means_healthy_truth() {
        let sim = simulate(&constant_plant(0.1), &[], 1).unwrap();
        assert!(sim.truth.labels(0, 60, 360).iter().all(|&b| !b));
    }

    #[test]
    fn step_fault_truth_matches_window() {
        let spec = constant_plant(0.0);
        let sim = simulate(&spec, &[step(vec![1], 2 * HOUR, HOUR)], 1).unwrap();
        let labels = sim.truth.labels(0, 60, 360);
        for (t, &b) in labels.iter().enumerate() {
            assert_eq!(b, (120..180).contains(&t), "row {t}");
        }
        let affected = sim.truth.affected(0, 60, 360);
        assert_eq!(affected[150], BTreeSet::from([1]));
        assert!(affected[10].is_empty());
        let healthy = simulate(&spec, &[], 1).unwrap();
        for (f, h) in sim.records.iter().zip(&healthy.records) {
            assert_eq!(f.timestamp, h.timestamp);
            let inside = f.signal == 1 && (2 * HOUR..3 * HOUR).contains(&f.timestamp);
            if inside {
                assert!((f.value - h.value - 4.0).abs() < 1e-12);
            } else {
                assert_eq!(f.value, h.value);
            }
        }
    }

    #[test]
    fn harmonics_add_to_the_base_wave() {
        let mut spec = constant_plant(0.0);
        if let Generator::Periodic { harmonics, .. } = &mut spec.sensors[1].generator {
            harmonics.push(Harmonic {
                amplitude: 0.5,
                period_seconds: 90.0,
                phase: 1.0,
            });
        }
        let sim = simulate(&spec, &[], 2).unwrap();
        let tau = std::f64::consts::TAU;
        for r in sim.records.iter().filter(|r| r.signal == 1).take(200) {
            let x = r.timestamp as f64;
            let want =
                -1.0 + 2.0 * (tau * x / 600.0 + 0.3).sin() + 0.5 * (tau * x / 90.0 + 1.0).sin();
            assert!((r.value - want).abs() < 1e-12);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let spec = mini_plant();
        let a = simulate(&spec, &[], 9).unwrap();
        let b = simulate(&spec, &[], 9).unwrap();
        assert_eq!(a, b);
        let c = simulate(&spec, &[], 10).unwrap();
        assert_ne!(a.records, c.records);
    }

    #[test]
    fn parallel_matches_sequential() {
        let spec = constant_plant(0.5);
        let sim = simulate(&spec, &[], 4).unwrap();
        let mut seq: Vec<RawRecord> = (0..2)
            .flat_map(|id| simulate_sensor(&spec, id, &[], 4))
            .collect();
        seq.sort_by_key(|r| (r.timestamp, r.signal));
        assert_eq!(sim.records, seq);
    }

    #[test]
    fn constant_signal_resamples_exactly() {
        let spec = constant_plant(0.0);
        let sim = simulate(&spec, &[], 2).unwrap();
        let r = resample(&sim.records, &sim.signals, 60, 0, spec.end()).unwrap();
        for t in 0..r.series.rows() {
            let v = r.series.values[[t, 0]];
            assert!((v - 3.25).abs() < 1e-9, "row {t}: {v}");
        }
    }

    #[test]
    fn overlapping_faults_rejected() {
        let spec = constant_plant(0.0);
        let err = simulate(
            &spec,
            &[step(vec![0], 0, 100), step(vec![0, 1], 50, 100)],
            1,
        );
        assert!(matches!(err, Err(Error::Config(_))));
        // same time, different sensors is fine
        assert!(simulate(&spec, &[step(vec![0], 0, 100), step(vec![1], 50, 100)], 1).is_ok());
        assert!(simulate(&spec, &[step(vec![0], 6 * HOUR - 10, 100)], 1).is_err());
        assert!(simulate(&spec, &[step(vec![5], 0, 100)], 1).is_err());
    }

    #[test]
    fn fault_kinds() {
        let spec = constant_plant(0.0);
        let fault = |kind| FaultInjection {
            sensors: vec![0],
            kind,
            start_offset: 0,
            duration_seconds: 6 * HOUR,
            magnitude: 2.0,
        };
        let values = |kind| -> Vec<f64> {
            simulate(&spec, &[fault(kind)], 5)
                .unwrap()
                .records
                .iter()
                .filter(|r| r.signal == 0)
                .map(|r| r.value)
                .collect()
        };
        assert!(values(FaultKind::StuckAt).iter().all(|&v| v == 2.0));
        assert!(values(FaultKind::Step).iter().all(|&v| v == 5.25));
        let drift = values(FaultKind::Drift);
        assert!(drift.windows(2).all(|p| p[0] <= p[1]));
        assert!(drift[0] < 3.3 && *drift.last().unwrap() > 5.0);
        let noisy = values(FaultKind::NoiseBurst);
        assert!(noisy.iter().any(|&v| (v - 3.25).abs() > 1.0));
    }

    #[test]
    fn invalid_specs_rejected() {
        let mut spec = constant_plant(0.0);
        spec.components[0].sensors = vec![0];
        assert!(spec.validate().is_err());
        let mut spec = constant_plant(0.0);
        spec.components.push(ComponentSpec {
            name: "D".into(),
            sensors: vec![1],
            failure_type: String::new(),
        });
        assert!(spec.validate().is_err());
        let mut spec = constant_plant(0.0);
        spec.sensors[0].mean_interval = 0.0;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn counter_resets() {
        let spec = PlantSpec {
            start: 0,
            duration_seconds: 1000,
            components: vec![ComponentSpec {
                name: "C".into(),
                sensors: vec![0],
                failure_type: String::new(),
            }],
            sensors: vec![SensorSpec {
                name: "c".into(),
                generator: Generator::Counter {
                    increment: 2,
                    reset_seconds: 100,
                },
                mean_interval: 10.0,
                jitter: 0.0,
                unit: None,
            }],
        };
        let sim = simulate(&spec, &[], 0).unwrap();
        for r in &sim.records {
            let since_reset = r.timestamp % 100;
            let expected = 2.0 * (since_reset / 10 + 1) as f64;
            // the first sample may land anywhere in the first interval
            assert!(r.value <= expected + 1e-12 && r.value >= 2.0);
        }
        let th = spec.thresholds();
        assert_eq!(
            th[0],
            SignalThreshold::expert(SignalRef::Name("c".into()), Some(0.0), Some(22.0))
        );
    }

    #[test]
    fn mini_plant_shape() {
        let spec = mini_plant();
        spec.validate().unwrap();
        assert_eq!(spec.sensors.len(), 12);
        assert_eq!(spec.components.len(), 4);
        assert_eq!(spec.duration_seconds, 14 * DAY);
        assert_eq!(spec.lookup_table().len(), 12);
        assert_eq!(spec.thresholds().len(), 12);
    }

    #[test]
    fn spec_json_roundtrip() {
        let spec = mini_plant();
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<PlantSpec>(&json).unwrap(), spec);
    }
}
