//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Tolerances are the constants below.

use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use lossdiff_cli::run_cli;
use lossdiff_core::estimators::{
    jtcp_jitter, vegas_backlog, veno_classify, westwood_bwe, JitterPair, LossClass, VegasSample,
    WestwoodFilter,
};
use lossdiff_core::header::{
    decode_header, encode_header, encode_with_checksum, pseudo_header, set_link_mode,
    verify_checksum, LinkMode, TcpFlags, TcpHeader, HEADER_LEN,
};
use lossdiff_core::netsim::{
    run_scenario_with, ControllerKind, LoadMode, RunOptions, RunResult, ScenarioConfig,
};
use lossdiff_core::trace::TraceEvent;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

const PACED_GOODPUT: f64 = 150.0;
const PACED_GOODPUT_TOL: f64 = 5.0;
const PACED_BUDGET: Duration = Duration::from_secs(1);
const SNR_MIN_MAX_FLOOR: f64 = 0.7;
const RFC_MIN_MAX_CEIL: f64 = 0.25;
const LONG_RUN_BUDGET: Duration = Duration::from_secs(10);
const ZERO_LOSS_RATIO: (f64, f64) = (0.95, 1.05);
const SWEEP: [f64; 5] = [0.0, 0.01, 0.02, 0.05, 0.1];
const ESTIMATOR_TRIALS: usize = 10_000;
const VEGAS_REL_TOL: f64 = 1e-9;
const JITTER_ABS_TOL: f64 = 1e-12;
const CODEC_ROUNDTRIPS: usize = 10_000;
const CORRUPTION_TRIALS: usize = 1_000;
const REFERENCE_SEED: u64 = 42;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn summary(cfg: &ScenarioConfig) -> RunResult {
    run_scenario_with(cfg, RunOptions::summary_only()).expect("valid scenario")
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let v = f();
    (v, start.elapsed())
}

fn lossy_reference(controller: ControllerKind) -> ScenarioConfig {
    ScenarioConfig::wireless_reference()
        .with_error_loss_rate(0.05)
        .with_snr_db(3.0)
        .with_seed(REFERENCE_SEED)
        .with_controller(controller)
}

fn paced_goodput() -> Outcome {
    let mut cfg = ScenarioConfig::wireless_reference()
        .with_error_loss_rate(0.25)
        .with_duration(100.0)
        .with_seed(REFERENCE_SEED);
    cfg.load = LoadMode::Paced { pps: 200.0 };
    let (r, took) = timed(|| summary(&cfg));
    let pass = (r.goodput_pps - PACED_GOODPUT).abs() <= PACED_GOODPUT_TOL && took < PACED_BUDGET;
    outcome(
        pass,
        format!(
            "paced 200 pkt/s at 25% loss: goodput {:.2} pkt/s (want {PACED_GOODPUT} +/- {PACED_GOODPUT_TOL}), {:.3} s",
            r.goodput_pps,
            took.as_secs_f64()
        ),
    )
}

fn window_doubling() -> Outcome {
    let cfg = ScenarioConfig::wireless_reference()
        .with_rwnd(16_000)
        .with_duration(1.0);
    let r = run_scenario_with(&cfg, RunOptions::default()).expect("valid scenario");

    let acks: Vec<u64> = r
        .trace
        .iter()
        .filter(|t| t.event == TraceEvent::Ack)
        .map(|t| t.cwnd)
        .collect();
    let mut want: Vec<u64> = (2..=16).map(|s| s * 1000).collect();
    want.resize(acks.len().max(want.len()), 16_000);
    let trace_ok = acks == want;

    // rounds are bursts of sends separated by a round-trip gap
    let mut rounds: Vec<usize> = Vec::new();
    let mut last = None;
    for t in &r.transmissions {
        let now = t.send_time.as_secs_f64();
        match last {
            Some(prev) if now - prev < 0.005 => *rounds.last_mut().unwrap() += 1,
            _ => rounds.push(1),
        }
        last = Some(now);
    }
    let full = &rounds[..rounds.len() - 1];
    let rounds_ok =
        full.len() > 5 && full[..5] == [1, 2, 4, 8, 16] && full[5..].iter().all(|&n| n == 16);
    outcome(
        trace_ok && rounds_ok,
        format!(
            "zero loss, rwnd 16 segments: {} ACK rows {}, first rounds {:?}",
            acks.len(),
            if trace_ok {
                "match 2000..16000 then 16000"
            } else {
                "differ"
            },
            &rounds[..rounds.len().min(7)]
        ),
    )
}

fn differentiation(snr: &RunResult, rfc: &RunResult) -> Outcome {
    let (s, b) = (&snr.totals, &rfc.totals);
    let pass = s.halvings == 0
        && s.retransmissions == s.timeouts
        && b.halvings == b.timeouts
        && s.queue_drops == 0
        && b.queue_drops == 0
        && s.timeouts > 0;
    outcome(
        pass,
        format!(
            "350 s, 5% loss, snr 3 dB: snr halvings {} retransmissions {} timeouts {}; rfc793 halvings {} timeouts {}; queue drops {}/{}",
            s.halvings, s.retransmissions, s.timeouts, b.halvings, b.timeouts, s.queue_drops, b.queue_drops
        ),
    )
}

fn window_shape(snr: &RunResult, rfc: &RunResult, took: [Duration; 2]) -> Outcome {
    let (rs, rr) = (snr.cwnd.min_max_ratio(), rfc.cwnd.min_max_ratio());
    let slowest = took[0].max(took[1]);
    let pass = rs >= SNR_MIN_MAX_FLOOR && rr <= RFC_MIN_MAX_CEIL && slowest < LONG_RUN_BUDGET;
    outcome(
        pass,
        format!(
            "cwnd min/max: snr {rs:.3} (>= {SNR_MIN_MAX_FLOOR}), rfc793 {rr:.3} (<= {RFC_MIN_MAX_CEIL}); slowest run {:.2} s",
            slowest.as_secs_f64()
        ),
    )
}

fn sweep_ordering() -> Outcome {
    let tmp = TempDir::new().expect("temp dir");
    let scenario = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/wireless.cfg");
    let sweep = SWEEP.map(|r| r.to_string()).join(",");
    let seed = REFERENCE_SEED.to_string();
    let code = run_cli([
        "lossdiff",
        "compare",
        "--scenario",
        scenario.to_str().unwrap(),
        "--seed",
        &seed,
        "--sweep",
        &sweep,
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    if code != 0 {
        return outcome(false, format!("compare exited {code}"));
    }
    let csv = fs::read_to_string(tmp.path().join("compare.csv")).expect("compare.csv");
    let mut goodput = [[0.0f64; 2]; SWEEP.len()];
    for line in csv.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let rate: f64 = cols[0].parse().unwrap();
        let i = SWEEP.iter().position(|&r| r == rate).unwrap();
        let j = usize::from(cols[1] == "snr");
        goodput[i][j] = cols[2].parse().unwrap();
    }
    let ratio0 = goodput[0][1] / goodput[0][0];
    let zero_ok = (ZERO_LOSS_RATIO.0..=ZERO_LOSS_RATIO.1).contains(&ratio0);
    let snr_ahead = goodput[1..].iter().all(|g| g[1] > g[0]);
    let rfc_falls = goodput.windows(2).all(|w| w[1][0] < w[0][0]);
    let table = SWEEP
        .iter()
        .zip(&goodput)
        .map(|(r, g)| format!("{}%: {:.0}/{:.0}", r * 100.0, g[0], g[1]))
        .collect::<Vec<_>>()
        .join(", ");
    outcome(
        zero_ok && snr_ahead && rfc_falls,
        format!("sweep rfc793/snr goodput pkt/s [{table}]; ratio at 0% {ratio0:.4}"),
    )
}

fn high_snr_equivalence() -> Outcome {
    let cases = [(0.01, 350.0), (0.05, 350.0), (0.2, 60.0), (0.5, 30.0)];
    let mut details = Vec::new();
    let mut pass = true;
    for (loss, duration) in cases {
        let cfg = ScenarioConfig::wireless_reference()
            .with_snr_db(10.0)
            .with_error_loss_rate(loss)
            .with_duration(duration)
            .with_seed(REFERENCE_SEED);
        let opts = RunOptions {
            record_trace: true,
            record_transmissions: false,
        };
        let run =
            |c| run_scenario_with(&cfg.clone().with_controller(c), opts).expect("valid scenario");
        let (a, b) = (run(ControllerKind::Rfc793), run(ControllerKind::Snr));
        let same = a.trace == b.trace && b.totals.halvings == b.totals.timeouts;
        pass &= same && b.totals.halvings > 0;
        details.push(format!("{}%: {} halvings", loss * 100.0, b.totals.halvings));
    }
    outcome(
        pass,
        format!(
            "snr 10 dB, identical traces for both controllers ({})",
            details.join(", ")
        ),
    )
}

fn estimator_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_vegas = 0.0f64;
    let mut worst_jitter = 0.0f64;
    let mut westwood_ok = true;
    let mut veno_ok = true;
    for _ in 0..ESTIMATOR_TRIALS {
        let base = rng.random_range(1e-4..2.0);
        let v = VegasSample {
            cwnd: rng.random_range(0.0..1e4),
            base_rtt: base,
            actual_rtt: base + rng.random_range(0.0..2.0),
        };
        let r = vegas_backlog(v).expect("valid sample");
        worst_vegas = worst_vegas.max((r.n - r.n_from_delay(&v)).abs() / r.n.abs().max(1.0));

        let p = JitterPair {
            s_i: rng.random_range(0.0..100.0),
            r_i: rng.random_range(0.0..200.0),
            s_j: rng.random_range(0.0..100.0),
            r_j: rng.random_range(0.0..200.0),
        };
        let q = JitterPair {
            s_i: p.s_j,
            r_i: p.r_j,
            s_j: p.s_i,
            r_j: p.r_i,
        };
        worst_jitter = worst_jitter.max((jtcp_jitter(p) + jtcp_jitter(q)).abs());

        let (sbw, sbw_prev, bwe_prev) = (
            rng.random_range(0.0..1e9),
            rng.random_range(0.0..1e9),
            rng.random_range(0.0..1e9),
        );
        let bwe = |t| {
            westwood_bwe(WestwoodFilter {
                sbw,
                sbw_prev,
                bwe_prev,
                t,
            })
            .expect("t in range")
        };
        westwood_ok &= bwe(0.0) == (sbw + sbw_prev) / 2.0 && bwe(1.0) == bwe_prev;

        let thres = rng.random_range(-100.0..100.0);
        veno_ok &= veno_classify(thres, thres) == LossClass::ErrorLoss;
    }
    outcome(
        worst_vegas <= VEGAS_REL_TOL && worst_jitter <= JITTER_ABS_TOL && westwood_ok && veno_ok,
        format!(
            "{ESTIMATOR_TRIALS} trials: vegas rel err {worst_vegas:.1e}, jitter antisymmetry {worst_jitter:.1e}, westwood t=0/1 exact {westwood_ok}, veno boundary error {veno_ok}"
        ),
    )
}

fn random_header(rng: &mut ChaCha8Rng) -> TcpHeader {
    TcpHeader {
        source_port: rng.random(),
        dest_port: rng.random(),
        seq_number: rng.random(),
        ack_number: rng.random(),
        reserved: if rng.random() { 0b100 } else { 0 },
        flags: TcpFlags {
            urg: rng.random(),
            ack: rng.random(),
            psh: rng.random(),
            rst: rng.random(),
            syn: rng.random(),
            fin: rng.random(),
        },
        window: rng.random(),
        checksum: rng.random(),
        urgent_pointer: rng.random(),
        ..TcpHeader::default()
    }
}

fn codec_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut roundtrip_ok = 0;
    let mut one_bit_ok = 0;
    for _ in 0..CODEC_ROUNDTRIPS {
        let h = random_header(&mut rng);
        let bytes = encode_header(&h).expect("valid header");
        if decode_header(&bytes) == Ok(h) {
            roundtrip_ok += 1;
        }
        let wired = encode_header(&set_link_mode(h, LinkMode::Wired)).unwrap();
        let wireless = encode_header(&set_link_mode(h, LinkMode::Wireless)).unwrap();
        let diff: u32 = wired
            .iter()
            .zip(&wireless)
            .map(|(a, b)| (a ^ b).count_ones())
            .sum();
        if diff == 1 {
            one_bit_ok += 1;
        }
    }

    let mut detected = 0;
    for _ in 0..CORRUPTION_TRIALS {
        let h = random_header(&mut rng);
        let payload: Vec<u8> = (0..rng.random_range(0..64)).map(|_| rng.random()).collect();
        let ph = pseudo_header((HEADER_LEN + payload.len()) as u16);
        let mut bytes = encode_with_checksum(&h, &payload, &ph).unwrap();
        let mut payload = payload;
        assert!(verify_checksum(&bytes, &payload, &ph));
        let bit = rng.random_range(0..(HEADER_LEN + payload.len()) * 8);
        let (byte, mask) = (bit / 8, 1u8 << (bit % 8));
        if byte < HEADER_LEN {
            bytes[byte] ^= mask;
        } else {
            payload[byte - HEADER_LEN] ^= mask;
        }
        if !verify_checksum(&bytes, &payload, &ph) {
            detected += 1;
        }
    }
    outcome(
        roundtrip_ok == CODEC_ROUNDTRIPS
            && one_bit_ok == CODEC_ROUNDTRIPS
            && detected == CORRUPTION_TRIALS,
        format!(
            "roundtrip {roundtrip_ok}/{CODEC_ROUNDTRIPS}, link-mode one-bit {one_bit_ok}/{CODEC_ROUNDTRIPS}, corruption detected {detected}/{CORRUPTION_TRIALS}"
        ),
    )
}

fn determinism() -> Outcome {
    let tmp = TempDir::new().expect("temp dir");
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let scenario = golden.join("small.cfg");
    let run = |name: &str| {
        let out = tmp.path().join(name);
        let code = run_cli([
            "lossdiff",
            "run",
            "--scenario",
            scenario.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        (code, fs::read(out.join("trace.csv")).unwrap_or_default())
    };
    let (ca, a) = run("a");
    let (cb, b) = run("b");
    let want = fs::read(golden.join("trace_small.csv")).unwrap_or_default();
    let pass = ca == 0 && cb == 0 && !a.is_empty() && a == b && a == want;
    outcome(
        pass,
        format!(
            "trace.csv twice: {} bytes, identical {}, matches golden {}",
            a.len(),
            a == b,
            a == want
        ),
    )
}

fn main() -> ExitCode {
    // a test harness may export this; the sweep must use its own seed
    std::env::remove_var("LOSSDIFF_SEED");

    let mut results: Vec<(usize, Outcome)> = Vec::new();
    results.push((1, paced_goodput()));
    results.push((2, window_doubling()));
    let (snr, t_snr) = timed(|| summary(&lossy_reference(ControllerKind::Snr)));
    let (rfc, t_rfc) = timed(|| summary(&lossy_reference(ControllerKind::Rfc793)));
    results.push((3, differentiation(&snr, &rfc)));
    results.push((4, window_shape(&snr, &rfc, [t_snr, t_rfc])));
    results.push((5, sweep_ordering()));
    results.push((6, high_snr_equivalence()));
    results.push((7, estimator_oracles()));
    results.push((8, codec_properties()));
    results.push((9, determinism()));

    let mut failed = 0;
    for (n, o) in &results {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {n}: {tag}: {}", o.detail);
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
