//! Transmit side and propagation: spreading codes, multipath channels,
//! Alamouti encoding and the stacked received vector.
//!
//! For user `u` and transmit antenna `p` the per-subcarrier response is
//! `a_{u,p} = H_{u,p} ⊙ c_{u,p}`. Over one Alamouti block the receiver stacks
//! the first-interval observation on top of the conjugated second-interval
//! observation, which makes the model linear in the two block symbols:
//!
//! ```text
//! r = Σ_u f_{u,1} b_u(2k-1) + f_{u,2} b_u(2k) + n
//! f_{u,1} = [a_{u,1}; conj(a_{u,2})],  f_{u,2} = [a_{u,2}; -conj(a_{u,1})]
//! ```

use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, TAU};

use crate::error::{check_len, Error, Result};
use crate::numerics::{c, gaussian_complex, CVector, SeededRng, C64};

/// Chip amplitude convention.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ChipScale {
    /// Chip components are `±1/√2`; every chip has unit magnitude and a code
    /// has squared norm `M`.
    UnitChip,
    /// Chip components are `±1/√(2M)`; every code has unit squared norm.
    #[default]
    UnitNormCode,
}

impl ChipScale {
    /// Magnitude of one real or imaginary chip component.
    pub fn component(self, subcarriers: usize) -> f64 {
        match self {
            ChipScale::UnitChip => FRAC_1_SQRT_2,
            ChipScale::UnitNormCode => FRAC_1_SQRT_2 / libm::sqrt(subcarriers as f64),
        }
    }
}

/// Dimensions and noise level of one simulated uplink.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemConfig {
    /// Subcarrier count `M`, equal to the spreading-code length.
    pub subcarriers: usize,
    /// Active users `U`; user 0 is the one being detected.
    pub users: usize,
    /// Multipath taps per (user, antenna) channel.
    pub paths: usize,
    /// Per-entry noise power `σ_v²`.
    pub noise_variance: f64,
    pub chip_scale: ChipScale,
    pub master_seed: u64,
}

impl Default for SystemConfig {
    /// 32 subcarriers, 20 users, three-path Rayleigh channels, 10 dB SNR.
    fn default() -> Self {
        SystemConfig {
            subcarriers: 32,
            users: 20,
            paths: 3,
            noise_variance: 0.1,
            chip_scale: ChipScale::default(),
            master_seed: 1,
        }
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        let m = self.subcarriers;
        if m < 2 || !m.is_power_of_two() {
            return Err(Error::Config {
                field: "subcarriers",
                reason: "must be a power of two and at least 2",
            });
        }
        if self.users == 0 {
            return Err(Error::Config {
                field: "users",
                reason: "must be at least 1",
            });
        }
        if self.paths == 0 || self.paths > m {
            return Err(Error::Config {
                field: "paths",
                reason: "must lie in 1..=subcarriers",
            });
        }
        if !(self.noise_variance >= 0.0 && self.noise_variance.is_finite()) {
            return Err(Error::Config {
                field: "noise_variance",
                reason: "must be finite and non-negative",
            });
        }
        Ok(())
    }
}

/// One length-`M` spreading sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct SpreadingCode {
    pub chips: CVector,
}

/// Codes used by one user on transmit antennas A and B.
pub type CodePair = [SpreadingCode; 2];

/// Draws `2U` codes whose chip components are independent fair `±` draws.
pub fn generate_spreading_codes(cfg: &SystemConfig, rng: &mut SeededRng) -> Result<Vec<CodePair>> {
    cfg.validate()?;
    let amp = cfg.chip_scale.component(cfg.subcarriers);
    let draw = |rng: &mut SeededRng| SpreadingCode {
        chips: (0..cfg.subcarriers)
            .map(|_| {
                let re = if rng.coin() { amp } else { -amp };
                let im = if rng.coin() { amp } else { -amp };
                c(re, im)
            })
            .collect(),
    };
    Ok((0..cfg.users).map(|_| [draw(rng), draw(rng)]).collect())
}

/// Multipath taps and frequency responses for every (user, antenna) link.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelRealization {
    subcarriers: usize,
    taps: Vec<[CVector; 2]>,
    freq_response: Vec<[CVector; 2]>,
}

impl ChannelRealization {
    /// Builds the realization from explicit taps; responses are the
    /// `M`-point DFT of the zero-padded taps.
    pub fn from_taps(subcarriers: usize, taps: Vec<[CVector; 2]>) -> Result<Self> {
        for pair in &taps {
            for t in pair {
                if t.is_empty() || t.len() > subcarriers {
                    return Err(Error::Dimension {
                        what: "channel taps",
                        expected: subcarriers,
                        found: t.len(),
                    });
                }
            }
        }
        let freq_response = taps
            .iter()
            .map(|[a, b]| [dft(a, subcarriers), dft(b, subcarriers)])
            .collect();
        Ok(ChannelRealization {
            subcarriers,
            taps,
            freq_response,
        })
    }

    pub fn subcarriers(&self) -> usize {
        self.subcarriers
    }

    pub fn users(&self) -> usize {
        self.taps.len()
    }

    pub fn taps(&self, user: usize, antenna: usize) -> &CVector {
        &self.taps[user][antenna]
    }

    /// `H_{u,p}` as the diagonal of the frequency-domain channel matrix.
    pub fn response(&self, user: usize, antenna: usize) -> &CVector {
        &self.freq_response[user][antenna]
    }
}

fn dft(taps: &CVector, m: usize) -> CVector {
    (0..m)
        .map(|k| {
            taps.iter().enumerate().fold(C64::new(0.0, 0.0), |acc, (l, t)| {
                // reduce the phase index first so large k*l stays exact
                let phase = -TAU * ((k * l) % m) as f64 / m as f64;
                acc + t * c(libm::cos(phase), libm::sin(phase))
            })
        })
        .collect()
}

/// Rayleigh channels with `paths` equal-power taps of total unit power.
pub fn generate_channel(cfg: &SystemConfig, rng: &mut SeededRng) -> Result<ChannelRealization> {
    cfg.validate()?;
    let var = 1.0 / cfg.paths as f64;
    let mut taps = Vec::with_capacity(cfg.users);
    for _ in 0..cfg.users {
        let a = gaussian_complex(cfg.paths, var, rng)?;
        let b = gaussian_complex(cfg.paths, var, rng)?;
        taps.push([a, b]);
    }
    ChannelRealization::from_taps(cfg.subcarriers, taps)
}

/// Effective signatures of one user.
#[derive(Clone, Debug, PartialEq)]
pub struct Signature {
    /// `a_{u,1}`, `a_{u,2}`.
    pub a: [CVector; 2],
    /// `f_{u,1}`, `f_{u,2}`, each of length `2M`.
    pub f: [CVector; 2],
}

impl Signature {
    pub fn from_responses(a1: CVector, a2: CVector) -> Result<Self> {
        check_len("antenna responses", a1.len(), a2.len())?;
        let f1 = CVector::concat(&a1, &a2.conj());
        let f2 = CVector::concat(&a2, &a1.conj().scaled(c(-1.0, 0.0)));
        Ok(Signature {
            a: [a1, a2],
            f: [f1, f2],
        })
    }
}

/// Signatures of all users; index 0 is the desired user.
#[derive(Clone, Debug, PartialEq)]
pub struct SignatureSet {
    subcarriers: usize,
    users: Vec<Signature>,
}

impl SignatureSet {
    pub fn new(subcarriers: usize, users: Vec<Signature>) -> Result<Self> {
        for s in &users {
            check_len("signature", 2 * subcarriers, s.f[0].len())?;
        }
        Ok(SignatureSet { subcarriers, users })
    }

    pub fn subcarriers(&self) -> usize {
        self.subcarriers
    }

    /// Stacked length `2M`.
    pub fn dim(&self) -> usize {
        2 * self.subcarriers
    }

    pub fn users(&self) -> &[Signature] {
        &self.users
    }

    pub fn user(&self, u: usize) -> &Signature {
        &self.users[u]
    }
}

/// `a_{u,p} = H_{u,p} ⊙ c_{u,p}` and the stacked `f` vectors for every user.
pub fn build_signatures(codes: &[CodePair], channel: &ChannelRealization) -> Result<SignatureSet> {
    check_len("users", channel.users(), codes.len())?;
    let m = channel.subcarriers();
    let mut users = Vec::with_capacity(codes.len());
    for (u, pair) in codes.iter().enumerate() {
        let mut a: [CVector; 2] = Default::default();
        for (p, code) in pair.iter().enumerate() {
            check_len("spreading code", m, code.chips.len())?;
            a[p] = hadamard(channel.response(u, p), &code.chips);
        }
        let [a1, a2] = a;
        users.push(Signature::from_responses(a1, a2)?);
    }
    SignatureSet::new(m, users)
}

fn hadamard(x: &CVector, y: &CVector) -> CVector {
    x.iter().zip(y.iter()).map(|(a, b)| a * b).collect()
}

/// Unit-energy Gray-mapped QPSK: bit 0 selects the sign of the real part,
/// bit 1 the sign of the imaginary part, `false` meaning positive.
pub fn qpsk_symbol(bits: [bool; 2]) -> C64 {
    let s = |b: bool| if b { -FRAC_1_SQRT_2 } else { FRAC_1_SQRT_2 };
    c(s(bits[0]), s(bits[1]))
}

/// Hard QPSK decision; a component of exactly zero decides for the
/// positive half-plane.
pub fn qpsk_slice(y: C64) -> [bool; 2] {
    [y.re < 0.0, y.im < 0.0]
}

/// The two symbols `b_u(2k-1)`, `b_u(2k)` of one Alamouti block.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymbolPair {
    pub first: C64,
    pub second: C64,
}

impl SymbolPair {
    pub fn new(first: C64, second: C64) -> Self {
        SymbolPair { first, second }
    }

    pub fn draw(rng: &mut SeededRng) -> Self {
        let mut sym = || qpsk_symbol([rng.coin(), rng.coin()]);
        let first = sym();
        let second = sym();
        SymbolPair { first, second }
    }

    /// The four bits carried by the block.
    pub fn bits(&self) -> [bool; 4] {
        let [a, b] = qpsk_slice(self.first);
        let [c, d] = qpsk_slice(self.second);
        [a, b, c, d]
    }
}

pub fn draw_symbols(count: usize, rng: &mut SeededRng) -> Result<Vec<SymbolPair>> {
    if count == 0 {
        return Err(Error::Domain("symbol count must be positive"));
    }
    Ok((0..count).map(|_| SymbolPair::draw(rng)).collect())
}

/// Stacked received vector: `Σ_u f_{u,1} b_u(2k-1) + f_{u,2} b_u(2k) + n`.
pub fn synthesize_received(
    signatures: &SignatureSet,
    symbols: &[SymbolPair],
    noise: &CVector,
) -> Result<CVector> {
    check_len("symbol pairs per user", signatures.users().len(), symbols.len())?;
    check_len("noise", signatures.dim(), noise.len())?;
    let mut r = noise.clone();
    for (sig, b) in signatures.users().iter().zip(symbols) {
        r.axpy(b.first, &sig.f[0]);
        r.axpy(b.second, &sig.f[1]);
    }
    Ok(r)
}

/// Simulates the two Alamouti intervals separately and stacks
/// `[r1; conj(r2)]`.
///
/// Interval 1 sends `(b(2k-1), b(2k))` from antennas A and B; interval 2
/// sends `(-b*(2k), b*(2k-1))`. Responses are formed directly from
/// `H ⊙ c`, so this is an independent route to [`synthesize_received`] when
/// the stacked noise is taken as `[n1; conj(n2)]`.
pub fn two_interval_oracle(
    codes: &[CodePair],
    channel: &ChannelRealization,
    symbols: &[SymbolPair],
    noise_first: &CVector,
    noise_second: &CVector,
) -> Result<CVector> {
    check_len("users", channel.users(), codes.len())?;
    check_len("symbol pairs per user", codes.len(), symbols.len())?;
    let m = channel.subcarriers();
    check_len("first-interval noise", m, noise_first.len())?;
    check_len("second-interval noise", m, noise_second.len())?;
    let mut r1 = noise_first.clone();
    let mut r2 = noise_second.clone();
    for (u, (pair, b)) in codes.iter().zip(symbols).enumerate() {
        for k in 0..m {
            let ha = channel.response(u, 0)[k] * pair[0].chips[k];
            let hb = channel.response(u, 1)[k] * pair[1].chips[k];
            r1[k] += ha * b.first + hb * b.second;
            r2[k] += -ha * b.second.conj() + hb * b.first.conj();
        }
    }
    Ok(CVector::concat(&r1, &r2.conj()))
}

/// `σ_v² = 10^(-snr_db/10)` for unit-energy symbols.
pub fn snr_to_noise_variance(snr_db: f64) -> f64 {
    libm::pow(10.0, -snr_db / 10.0)
}

/// One received block together with what every user sent.
#[derive(Clone, Debug)]
pub struct Transmission {
    pub received: CVector,
    pub symbols: Vec<SymbolPair>,
}

impl Transmission {
    /// Symbols of the desired user.
    pub fn desired(&self) -> SymbolPair {
        self.symbols[0]
    }
}

/// Codes, channels and signatures held fixed for a whole simulation run.
#[derive(Clone, Debug)]
pub struct Link {
    config: SystemConfig,
    codes: Vec<CodePair>,
    channel: ChannelRealization,
    signatures: SignatureSet,
}

impl Link {
    /// Draws codes, then channels, from `rng`.
    pub fn generate(config: &SystemConfig, rng: &mut SeededRng) -> Result<Self> {
        let codes = generate_spreading_codes(config, rng)?;
        let channel = generate_channel(config, rng)?;
        Self::from_parts(config.clone(), codes, channel)
    }

    pub fn from_parts(
        config: SystemConfig,
        codes: Vec<CodePair>,
        channel: ChannelRealization,
    ) -> Result<Self> {
        let signatures = build_signatures(&codes, &channel)?;
        Ok(Link {
            config,
            codes,
            channel,
            signatures,
        })
    }

    pub fn config(&self) -> &SystemConfig {
        &self.config
    }

    pub fn codes(&self) -> &[CodePair] {
        &self.codes
    }

    pub fn channel(&self) -> &ChannelRealization {
        &self.channel
    }

    pub fn signatures(&self) -> &SignatureSet {
        &self.signatures
    }

    /// Sends one block of fresh random symbols through the link.
    pub fn transmit(&self, noise_variance: f64, rng: &mut SeededRng) -> Result<Transmission> {
        let symbols: Vec<SymbolPair> = (0..self.codes.len()).map(|_| SymbolPair::draw(rng)).collect();
        let noise = gaussian_complex(self.signatures.dim(), noise_variance, rng)?;
        let received = synthesize_received(&self.signatures, &symbols, &noise)?;
        Ok(Transmission { received, symbols })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn cfg(m: usize, u: usize, paths: usize) -> SystemConfig {
        SystemConfig {
            subcarriers: m,
            users: u,
            paths,
            noise_variance: 0.0,
            chip_scale: ChipScale::UnitChip,
            master_seed: 0,
        }
    }

    fn flat(m: usize, users: usize) -> ChannelRealization {
        let one = CVector::from_parts(&[(1.0, 0.0)]);
        ChannelRealization::from_taps(m, vec![[one.clone(), one]; users]).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(SystemConfig::default().validate().is_ok());
        assert!(cfg(3, 1, 1).validate().is_err());
        assert!(cfg(1, 1, 1).validate().is_err());
        assert!(cfg(4, 0, 1).validate().is_err());
        assert!(cfg(4, 1, 5).validate().is_err());
        let mut c = cfg(4, 1, 1);
        c.noise_variance = -1.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn paper_sized_codes() {
        let mut rng = SeededRng::new(1);
        let codes = generate_spreading_codes(&cfg(32, 20, 3), &mut rng).unwrap();
        assert_eq!(codes.len(), 20);
        for pair in &codes {
            for code in pair {
                assert_eq!(code.chips.len(), 32);
                assert!(code.chips.iter().all(|z| (z.norm() - 1.0).abs() < 1e-14));
            }
        }
    }

    #[test]
    fn small_code_alphabet() {
        let mut rng = SeededRng::new(2);
        let codes = generate_spreading_codes(&cfg(2, 1, 1), &mut rng).unwrap();
        for code in &codes[0] {
            for z in code.chips.iter() {
                assert!((z.re.abs() - FRAC_1_SQRT_2).abs() < 1e-15);
                assert!((z.im.abs() - FRAC_1_SQRT_2).abs() < 1e-15);
            }
            assert!((code.chips.norm_sqr() - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn unit_norm_codes() {
        let mut c = cfg(32, 4, 3);
        c.chip_scale = ChipScale::UnitNormCode;
        let codes = generate_spreading_codes(&c, &mut SeededRng::new(3)).unwrap();
        for code in codes.iter().flatten() {
            assert!((code.chips.norm_sqr() - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn chip_sign_frequency() {
        let mut rng = SeededRng::new(4);
        let codes = generate_spreading_codes(&cfg(32, 5000, 1), &mut rng).unwrap();
        let total = 5000 * 2 * 32;
        let positive = codes
            .iter()
            .flatten()
            .flat_map(|code| code.chips.iter())
            .filter(|z| z.re > 0.0)
            .count();
        let freq = positive as f64 / total as f64;
        assert!((0.49..=0.51).contains(&freq), "{freq}");
    }

    #[test]
    fn delta_channels_are_flat() {
        let one = CVector::from_parts(&[(1.0, 0.0)]);
        let ch = ChannelRealization::from_taps(8, vec![[one.clone(), one]]).unwrap();
        assert!(ch.response(0, 0).iter().all(|h| (h - c(1.0, 0.0)).norm() < 1e-15));

        let delta = CVector::from_parts(&[(1.0, 0.0), (0.0, 0.0), (0.0, 0.0)]);
        let ch = ChannelRealization::from_taps(8, vec![[delta.clone(), delta]]).unwrap();
        assert!(ch.response(0, 1).iter().all(|h| (h - c(1.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn channel_dft_definition() {
        let taps = CVector::from_parts(&[(0.3, -0.1), (0.5, 0.2), (-0.4, 0.7)]);
        let ch = ChannelRealization::from_taps(4, vec![[taps.clone(), taps.clone()]]).unwrap();
        // H_m = Σ_l tap_l exp(-j 2π m l / 4), exp(-jπ/2) = -j
        let w = [c(1.0, 0.0), c(0.0, -1.0), c(-1.0, 0.0), c(0.0, 1.0)];
        for m in 0..4 {
            let expected = taps[0] + taps[1] * w[m % 4] + taps[2] * w[(2 * m) % 4];
            assert!((ch.response(0, 0)[m] - expected).norm() < 1e-14);
        }
    }

    #[test]
    fn channel_power_parseval() {
        let c3 = cfg(32, 1, 3);
        let mut rng = SeededRng::new(5);
        let n = 10_000;
        let mut acc = 0.0;
        for _ in 0..n {
            let ch = generate_channel(&c3, &mut rng).unwrap();
            acc += ch.response(0, 0).norm_sqr() / 32.0;
        }
        let mean = acc / n as f64;
        assert!((0.98..=1.02).contains(&mean), "{mean}");
    }

    #[test]
    fn flat_channel_signatures() {
        let mut rng = SeededRng::new(6);
        let codes = generate_spreading_codes(&cfg(4, 2, 1), &mut rng).unwrap();
        let sigs = build_signatures(&codes, &flat(4, 2)).unwrap();
        let s = sigs.user(1);
        assert_eq!(s.a[0], codes[1][0].chips);
        assert_eq!(s.f[0], CVector::concat(&codes[1][0].chips, &codes[1][1].chips.conj()));
        assert_eq!(s.f[0].len(), 8);
    }

    #[test]
    fn hand_elementwise_product() {
        let r = FRAC_1_SQRT_2;
        // two taps giving H = (2, j) at M = 2: H_0 = t0 + t1, H_1 = t0 - t1
        let taps = CVector::from_parts(&[(1.0, 0.5), (1.0, -0.5)]);
        let ch = ChannelRealization::from_taps(2, vec![[taps.clone(), taps]]).unwrap();
        assert!(ch.response(0, 0).max_abs_diff(&CVector::from_parts(&[(2.0, 0.0), (0.0, 1.0)])) < 1e-15);
        let code = SpreadingCode {
            chips: CVector::from_parts(&[(r, r), (r, -r)]),
        };
        let sigs = build_signatures(&[[code.clone(), code]], &ch).unwrap();
        let expected = CVector::from_parts(&[(2.0 * r, 2.0 * r), (r, r)]);
        assert!(sigs.user(0).a[0].max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn stacked_signatures_are_orthogonal() {
        let mut rng = SeededRng::new(7);
        let c4 = cfg(8, 3, 3);
        for _ in 0..20 {
            let link = Link::generate(&c4, &mut rng).unwrap();
            for s in link.signatures().users() {
                // a1^H a2 + (conj a2)^H (-conj a1) = a1^H a2 - a1^H a2
                let ip = s.f[0].inner(&s.f[1]);
                assert!(ip.norm() < 1e-14, "{ip}");
                let p = s.a[0].norm_sqr() + s.a[1].norm_sqr();
                assert!((s.f[0].norm_sqr() - p).abs() < 1e-13);
                assert!((s.f[1].norm_sqr() - p).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn symbol_alphabet_and_moments() {
        let mut rng = SeededRng::new(8);
        assert!(draw_symbols(0, &mut rng).is_err());
        let n = 100_000;
        let syms = draw_symbols(n, &mut rng).unwrap();
        let mut mean = C64::new(0.0, 0.0);
        let mut energy = 0.0;
        for s in &syms {
            for b in [s.first, s.second] {
                assert!((b.re.abs() - FRAC_1_SQRT_2).abs() < 1e-15);
                assert!((b.im.abs() - FRAC_1_SQRT_2).abs() < 1e-15);
                mean += b;
                energy += b.norm_sqr();
            }
        }
        assert!((mean / (2 * n) as f64).norm() <= 0.02);
        let e = energy / (2 * n) as f64;
        assert!((0.99..=1.01).contains(&e));
    }

    #[test]
    fn qpsk_mapping_round_trip() {
        for bits in [[false, false], [false, true], [true, false], [true, true]] {
            assert_eq!(qpsk_slice(qpsk_symbol(bits)), bits);
        }
        assert_eq!(qpsk_slice(c(0.7, 0.7)), [false, false]);
        assert_eq!(qpsk_slice(c(0.0, -0.3)), [false, true]);
    }

    #[test]
    fn single_symbol_pick_off() {
        let mut rng = SeededRng::new(9);
        let link = Link::generate(&cfg(4, 1, 2), &mut rng).unwrap();
        let sig = link.signatures().user(0);
        let zero = CVector::zeros(8);
        let one = c(1.0, 0.0);
        let nil = c(0.0, 0.0);
        let r = synthesize_received(link.signatures(), &[SymbolPair::new(one, nil)], &zero).unwrap();
        assert_eq!(r, sig.f[0]);
        let r = synthesize_received(link.signatures(), &[SymbolPair::new(nil, one)], &zero).unwrap();
        assert_eq!(r, sig.f[1]);
        assert!(synthesize_received(link.signatures(), &[], &zero).is_err());
    }

    #[test]
    fn oracle_flat_channel_cases() {
        let mut rng = SeededRng::new(10);
        let codes = generate_spreading_codes(&cfg(4, 1, 1), &mut rng).unwrap();
        let ch = flat(4, 1);
        let z = CVector::zeros(4);
        let one = c(1.0, 0.0);
        let nil = c(0.0, 0.0);
        let r = two_interval_oracle(&codes, &ch, &[SymbolPair::new(one, nil)], &z, &z).unwrap();
        assert!(r.max_abs_diff(&CVector::concat(&codes[0][0].chips, &codes[0][1].chips.conj())) < 1e-15);
        let r = two_interval_oracle(&codes, &ch, &[SymbolPair::new(nil, one)], &z, &z).unwrap();
        let expected = CVector::concat(&codes[0][1].chips, &codes[0][0].chips.conj().scaled(c(-1.0, 0.0)));
        assert!(r.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn oracle_matches_synthesis() {
        let mut rng = SeededRng::new(11);
        let c3 = cfg(4, 3, 2);
        let link = Link::generate(&c3, &mut rng).unwrap();
        let syms = draw_symbols(3, &mut rng).unwrap();
        let n1 = gaussian_complex(4, 0.3, &mut rng).unwrap();
        let n2 = gaussian_complex(4, 0.3, &mut rng).unwrap();
        let stacked_noise = CVector::concat(&n1, &n2.conj());
        let a = synthesize_received(link.signatures(), &syms, &stacked_noise).unwrap();
        let b = two_interval_oracle(link.codes(), link.channel(), &syms, &n1, &n2).unwrap();
        assert!(a.max_abs_diff(&b) <= 1e-12);
    }

    #[test]
    fn snr_conversion() {
        assert_eq!(snr_to_noise_variance(0.0), 1.0);
        assert!((snr_to_noise_variance(10.0) - 0.1).abs() < 1e-16);
        assert!((snr_to_noise_variance(3.0) - 0.501_187_233_627_272_3).abs() < 1e-15);
    }

    #[test]
    fn link_is_reproducible() {
        let c = cfg(8, 2, 3);
        let a = Link::generate(&c, &mut SeededRng::new(12)).unwrap();
        let b = Link::generate(&c, &mut SeededRng::new(12)).unwrap();
        assert_eq!(a.codes(), b.codes());
        assert_eq!(a.channel(), b.channel());
    }
}
