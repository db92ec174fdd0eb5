//! Synthetic appliance load.
//!
//! Each appliance is a small state machine over OFF and its listed power
//! states. Dwell times are exponential; every state change starts with a
//! linear ramp, and power increases overshoot the new level before
//! settling. Steady samples carry rounded Gaussian noise, OFF is exactly
//! zero. The aggregate is the elementwise sum of all appliances. Output is
//! a pure function of the seed.

use rand::Rng;
use rand_distr::{Distribution, Exp, Normal};

use crate::container::{channel_rng, Channel};
use crate::error::{Error, Result};
use crate::quantize::{ChannelSpec, QuantizedValue};

#[derive(Debug, Clone, PartialEq)]
pub struct ApplianceState {
    pub power_w: f64,
    pub dwell_mean_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transient {
    /// Samples from the old level to the peak (or new level).
    pub ramp_samples: u32,
    /// Peak above the new level on a rising step, as a fraction of the step.
    pub overshoot: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApplianceProfile {
    pub name: String,
    pub states: Vec<ApplianceState>,
    pub off_dwell_mean_s: f64,
    pub transient: Transient,
    /// Standard deviation of steady-state noise, in watts.
    pub noise_sd: f64,
}

impl ApplianceProfile {
    fn peak(&self) -> f64 {
        self.states
            .iter()
            .map(|s| s.power_w * (1.0 + self.transient.overshoot.max(0.0)))
            .fold(0.0, f64::max)
            + 6.0 * self.noise_sd
    }

    fn validate(&self, rate_hz: f64) -> Result<()> {
        if self.states.is_empty() {
            return Err(Error::usage(format!(
                "appliance {} has no states",
                self.name
            )));
        }
        let ramp_s = f64::from(self.transient.ramp_samples) / rate_hz;
        for s in &self.states {
            if !(s.power_w >= 0.0 && s.power_w.is_finite()) {
                return Err(Error::usage(format!(
                    "appliance {} has negative power",
                    self.name
                )));
            }
            if !positive(s.dwell_mean_s) || s.dwell_mean_s < ramp_s {
                return Err(Error::usage(format!(
                    "appliance {}: dwell mean {} s shorter than its transient",
                    self.name, s.dwell_mean_s
                )));
            }
        }
        if !positive(self.off_dwell_mean_s) || self.off_dwell_mean_s < ramp_s {
            return Err(Error::usage(format!(
                "appliance {}: bad OFF dwell",
                self.name
            )));
        }
        if !non_negative(self.noise_sd) || !non_negative(self.transient.overshoot) {
            return Err(Error::usage(format!(
                "appliance {}: negative noise or overshoot",
                self.name
            )));
        }
        Ok(())
    }
}

/// Default steady-state noise per appliance, in watts.
pub const DEFAULT_NOISE_SD: f64 = 0.22;

fn appliance(
    name: &str,
    states: &[(f64, f64)],
    off_dwell_s: f64,
    ramp: u32,
    overshoot: f64,
) -> ApplianceProfile {
    ApplianceProfile {
        name: name.to_string(),
        states: states
            .iter()
            .map(|&(power_w, dwell_mean_s)| ApplianceState {
                power_w,
                dwell_mean_s,
            })
            .collect(),
        off_dwell_mean_s: off_dwell_s,
        transient: Transient {
            ramp_samples: ramp,
            overshoot,
        },
        noise_sd: DEFAULT_NOISE_SD,
    }
}

fn positive(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

fn non_negative(x: f64) -> bool {
    x.is_finite() && x >= 0.0
}

/// Kettle, vacuum, steamer, refrigerator (3 states) and washing machine
/// (2 states) at their measured average powers.
pub fn default_profiles() -> Vec<ApplianceProfile> {
    vec![
        appliance("kettle", &[(1027.14, 150.0)], 1200.0, 3, 0.05),
        appliance("vacuum", &[(1001.78, 300.0)], 2400.0, 5, 0.30),
        appliance("steamer", &[(775.38, 600.0)], 2400.0, 4, 0.05),
        appliance(
            "refrigerator",
            &[(41.94, 300.0), (123.71, 120.0), (165.04, 600.0)],
            900.0,
            6,
            0.50,
        ),
        appliance(
            "washing machine",
            &[(172.29, 900.0), (249.95, 600.0)],
            3600.0,
            8,
            0.20,
        ),
    ]
}

/// Generator output: one power stream per appliance plus their sum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthOutput {
    pub appliances: Vec<(String, Vec<QuantizedValue>)>,
    pub aggregate: Vec<QuantizedValue>,
}

pub fn generate(
    profiles: &[ApplianceProfile],
    duration_s: f64,
    rate_hz: f64,
    seed: u64,
) -> Result<SynthOutput> {
    if !(duration_s > 0.0 && rate_hz > 0.0 && duration_s.is_finite() && rate_hz.is_finite()) {
        return Err(Error::usage("duration and rate must be positive"));
    }
    if profiles.is_empty() {
        return Err(Error::usage("no appliance profiles"));
    }
    for p in profiles {
        p.validate(rate_hz)?;
    }
    let peak: f64 = profiles.iter().map(ApplianceProfile::peak).sum();
    if peak > f64::from(i16::MAX) {
        return Err(Error::usage(format!(
            "combined peak load {peak:.0} W does not fit 16-bit samples"
        )));
    }
    let n = (duration_s * rate_hz).round() as usize;
    if n == 0 {
        return Err(Error::usage("duration too short for one sample"));
    }

    let mut aggregate = vec![0i32; n];
    let mut appliances = Vec::with_capacity(profiles.len());
    for (i, p) in profiles.iter().enumerate() {
        let stream = simulate(p, n, rate_hz, seed, i);
        for (a, &v) in aggregate.iter_mut().zip(&stream) {
            *a += v;
        }
        appliances.push((p.name.clone(), to_i16(&stream)?));
    }
    Ok(SynthOutput {
        appliances,
        aggregate: to_i16(&aggregate)?,
    })
}

fn to_i16(v: &[i32]) -> Result<Vec<QuantizedValue>> {
    v.iter()
        .map(|&x| {
            i16::try_from(x)
                .map_err(|_| Error::usage(format!("synthetic sample {x} W overflows 16 bits")))
        })
        .collect()
}

/// One appliance trace in whole watts.
fn simulate(p: &ApplianceProfile, n: usize, rate_hz: f64, seed: u64, index: usize) -> Vec<i32> {
    let mut rng = channel_rng(seed, index);
    let noise = (p.noise_sd > 0.0).then(|| Normal::new(0.0, p.noise_sd).expect("sd validated"));
    let ramp = p.transient.ramp_samples as usize;

    // state 0 is OFF, k >= 1 is p.states[k - 1]
    let power = |s: usize| if s == 0 { 0.0 } else { p.states[s - 1].power_w };
    let dwell_mean = |s: usize| {
        if s == 0 {
            p.off_dwell_mean_s
        } else {
            p.states[s - 1].dwell_mean_s
        }
    };
    let n_states = p.states.len() + 1;

    let mut out = Vec::with_capacity(n);
    let mut state = rng.gen_range(0..n_states);
    let mut prev_level = power(state);
    let mut first = true;
    while out.len() < n {
        let level = power(state);
        let dwell = Exp::new(1.0 / dwell_mean(state))
            .expect("dwell validated")
            .sample(&mut rng);
        let samples = ((dwell * rate_hz).ceil() as usize).max(ramp + 2);
        let mut k = 0;
        if !first && ramp > 0 {
            let peak = if level > prev_level {
                level + p.transient.overshoot * (level - prev_level)
            } else {
                level
            };
            while k < ramp && out.len() < n {
                let t = (k + 1) as f64 / ramp as f64;
                out.push((prev_level + (peak - prev_level) * t).round() as i32);
                k += 1;
            }
        }
        first = false;
        let base = level.round() as i32;
        while k < samples && out.len() < n {
            let jitter = match (&noise, state) {
                (Some(d), s) if s != 0 => d.sample(&mut rng).round() as i32,
                _ => 0,
            };
            out.push(base + jitter);
            k += 1;
        }
        prev_level = level;
        state = next_state(state, n_states, &mut rng);
    }
    out
}

/// OFF goes to any ON state; an ON state goes to OFF or another ON state.
fn next_state<R: Rng>(state: usize, n_states: usize, rng: &mut R) -> usize {
    if state == 0 {
        rng.gen_range(1..n_states)
    } else {
        let mut next = rng.gen_range(0..n_states - 1);
        if next >= state {
            next += 1;
        }
        next
    }
}

const METER_SEED_SALT: u64 = 0x6d65_7465_7273;

/// Steady meter channel: constant level plus rounded Gaussian noise, in
/// quantized units.
#[derive(Debug, Clone, PartialEq)]
pub struct MeterChannel {
    pub spec: ChannelSpec,
    pub level: i16,
    pub noise_sd: f64,
}

/// Default V, I and Q channels accompanying the synthetic active power.
pub fn default_meter_channels() -> [MeterChannel; 3] {
    let [v, i, _, q] = <[ChannelSpec; 4]>::try_from(ChannelSpec::household_defaults(false))
        .expect("four household channels");
    [
        MeterChannel {
            spec: v,
            level: 12000,
            noise_sd: 0.27,
        },
        MeterChannel {
            spec: i,
            level: 250,
            noise_sd: 0.22,
        },
        MeterChannel {
            spec: q,
            level: 15,
            noise_sd: 0.22,
        },
    ]
}

pub fn meter_stream(ch: &MeterChannel, n: usize, seed: u64, stream: usize) -> Vec<QuantizedValue> {
    let mut rng = channel_rng(seed ^ METER_SEED_SALT, stream);
    let noise = (ch.noise_sd > 0.0).then(|| Normal::new(0.0, ch.noise_sd).expect("sd validated"));
    (0..n)
        .map(|_| {
            let j = noise.as_ref().map_or(0.0, |d| d.sample(&mut rng).round());
            (f64::from(ch.level) + j).clamp(f64::from(i16::MIN), f64::from(i16::MAX)) as i16
        })
        .collect()
}

/// Quantized V, I, P, Q channels: P is the synthetic aggregate, the others
/// are steady meter channels.
pub fn household_channels(out: &SynthOutput, seed: u64) -> Vec<Channel> {
    let [v, i, q] = default_meter_channels();
    let n = out.aggregate.len();
    let p_spec = ChannelSpec::household_defaults(false).swap_remove(2);
    vec![
        Channel {
            values: meter_stream(&v, n, seed, 0),
            spec: v.spec,
        },
        Channel {
            values: meter_stream(&i, n, seed, 1),
            spec: i.spec,
        },
        Channel {
            values: out.aggregate.clone(),
            spec: p_spec,
        },
        Channel {
            values: meter_stream(&q, n, seed, 2),
            spec: q.spec,
        },
    ]
}

/// Fraction of samples equal to their predecessor.
pub fn repeat_fraction(values: &[QuantizedValue]) -> f64 {
    if values.len() < 2 {
        return 1.0;
    }
    let same = values.windows(2).filter(|w| w[0] == w[1]).count();
    same as f64 / (values.len() - 1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant(power: f64, noise: f64) -> ApplianceProfile {
        ApplianceProfile {
            name: "c".into(),
            states: vec![ApplianceState {
                power_w: power,
                dwell_mean_s: 1e12,
            }],
            off_dwell_mean_s: 1e-3,
            transient: Transient {
                ramp_samples: 0,
                overshoot: 0.0,
            },
            noise_sd: noise,
        }
    }

    #[test]
    fn appliance_powers() {
        let p = default_profiles();
        let rounded = |i: usize| -> Vec<i64> {
            p[i].states
                .iter()
                .map(|s| s.power_w.round() as i64)
                .collect()
        };
        assert_eq!(rounded(0), vec![1027]);
        assert_eq!(rounded(1), vec![1002]);
        assert_eq!(rounded(2), vec![775]);
        assert_eq!(rounded(3), vec![42, 124, 165]);
        assert_eq!(rounded(4), vec![172, 250]);
        assert!(p
            .iter()
            .flat_map(|a| &a.states)
            .all(|s| (0.0..=32767.0).contains(&s.power_w)));
    }

    #[test]
    fn degenerate_profile_is_constant() {
        // OFF dwell is tiny, so the first ON state lasts the whole run
        let out = generate(&[constant(1027.14, 0.0)], 20.0, 50.0, 3).unwrap();
        let v = &out.aggregate;
        assert_eq!(v.len(), 1000);
        let tail = &v[v.len() / 2..];
        assert!(tail.iter().all(|&x| x == 1027), "{:?}", &tail[..10]);
    }

    #[test]
    fn kettle_clusters_at_its_power() {
        let kettle = default_profiles().swap_remove(0);
        let out = generate(&[kettle], 3600.0, 50.0, 11).unwrap();
        let on: Vec<i16> = out.aggregate.iter().copied().filter(|&x| x > 900).collect();
        assert!(!on.is_empty());
        let near = on.iter().filter(|&&x| (x - 1027).abs() <= 1).count();
        assert!(near as f64 / on.len() as f64 > 0.95);
    }

    #[test]
    fn aggregate_is_exact_sum() {
        let out = generate(&default_profiles(), 120.0, 50.0, 5).unwrap();
        for i in 0..out.aggregate.len() {
            let s: i32 = out.appliances.iter().map(|(_, v)| i32::from(v[i])).sum();
            assert_eq!(i32::from(out.aggregate[i]), s);
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let a = generate(&default_profiles(), 60.0, 50.0, 9).unwrap();
        let b = generate(&default_profiles(), 60.0, 50.0, 9).unwrap();
        let c = generate(&default_profiles(), 60.0, 50.0, 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn default_repeat_fraction() {
        let out = generate(&default_profiles(), 3600.0, 50.0, 1).unwrap();
        let f = repeat_fraction(&out.aggregate);
        assert!(f >= 0.85, "repeat fraction {f}");
    }

    #[test]
    fn repeat_fraction_falls_with_noise() {
        let mut last = f64::INFINITY;
        for sd in [0.0, 0.3, 0.6, 1.2, 2.4] {
            let out = generate(&[constant(500.0, sd)], 600.0, 50.0, 2).unwrap();
            let f = repeat_fraction(&out.aggregate);
            assert!(f <= last, "sd {sd}: {f} > {last}");
            last = f;
        }
    }

    #[test]
    fn rejects_bad_profiles() {
        assert!(generate(&default_profiles(), 0.0, 50.0, 1).is_err());
        assert!(generate(&[], 1.0, 50.0, 1).is_err());
        assert!(generate(&[constant(-1.0, 0.0)], 1.0, 50.0, 1).is_err());
        assert!(generate(&[constant(40000.0, 0.0)], 1.0, 50.0, 1).is_err());
        let mut p = constant(10.0, 0.0);
        p.transient.ramp_samples = 100;
        p.states[0].dwell_mean_s = 0.5;
        assert!(generate(&[p], 1.0, 50.0, 1).is_err());
    }

    #[test]
    fn household_channel_layout() {
        let out = generate(&default_profiles(), 10.0, 50.0, 1).unwrap();
        let ch = household_channels(&out, 1);
        let names: Vec<_> = ch.iter().map(|c| c.spec.name.as_str()).collect();
        assert_eq!(names, ["V", "I", "P", "Q"]);
        assert!(ch.iter().all(|c| c.values.len() == 500));
        assert_eq!(ch[2].values, out.aggregate);
    }
}
