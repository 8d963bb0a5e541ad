use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};

use symab::engine::{calibrate_expansion, induction_family, AbstractionFamily, ExpansionPolicy};
use symab::infolattice::{learn_loop, StopReason};
use symab::lattice::complete_hierarchy;
use symab::music::{empirical_measure, label_report, load_chords, InstrumentRange};
use symab::{HypercubeWindow, Partition};

use crate::config::{RunConfig, DESK_WORK_LIMIT};
use crate::error::{CliError, Phase};
use crate::{DagFormat, GenerateArgs, LabelArgs, LearnArgs, RelateArgs};

pub fn generate(args: &GenerateArgs) -> Result<(), CliError> {
    let config = RunConfig::from_args(args)?;
    println!("generators: {} ({} before deduplication) from {}", config.set.len(), config.set.raw_size(), config.describe_source());
    println!("window: {} ({} points)", config.window, config.window.len());
    println!("subsets scheduled: {}", config.scheduled);
    if config.dry_run {
        return Ok(());
    }
    if config.work() > DESK_WORK_LIMIT && !config.full_run {
        return Err(CliError::Usage(format!(
            "{} subsets on {} points exceeds the desk-scale limit; pass --full-run to run it anyway",
            config.scheduled,
            config.window.len()
        )));
    }

    let mut policy = config.policy.clone();
    if config.calibrate {
        let small = HypercubeWindow::centered(config.window.dim(), config.tau as i64).usage("calibration window")?;
        let k = calibrate_expansion(&config.set, &small, &policy, &config.schedule).compute("calibration")?;
        println!("calibrated expansion factor on {small}: {k}");
        policy = ExpansionPolicy { fixed_k: Some(k), ..policy };
    }
    let family = induction_family(&config.set, &config.window, &policy, &config.schedule).compute("induction")?;
    let dag = complete_hierarchy(&family).compute("hierarchy")?;

    family.write_dir(&config.out).data(&config.out.display().to_string())?;
    let (name, body) = match config.format {
        DagFormat::Dot => ("dag.dot", dag.to_dot()),
        DagFormat::Json => ("dag.json", dag.to_json().compute("hierarchy export")?),
    };
    let dag_path = config.out.join(name);
    fs::write(&dag_path, body).data(&dag_path.display().to_string())?;

    let distinct = dag.nodes().len();
    println!("subsets computed: {}", family.len());
    println!("distinct partitions: {distinct}");
    println!("duplicates collapsed: {}", family.len() - distinct);
    println!("hierarchy edges: {}", dag.edges().len());
    println!("max expansion k observed: {}", family.max_k_observed());
    println!("approximate entries: {}", family.approximate_count());
    println!("wrote {}", config.out.display());
    if config.strict && family.approximate_count() > 0 {
        return Err(CliError::Compute(format!(
            "{} entries did not reach consensus within max-k {}",
            family.approximate_count(),
            policy.max_k
        )));
    }
    Ok(())
}

fn read_partition(path: &std::path::Path) -> Result<Partition, CliError> {
    let text = fs::read_to_string(path).data(&path.display().to_string())?;
    Partition::from_json(&text).data(&path.display().to_string())
}

pub fn relate(args: &RelateArgs) -> Result<(), CliError> {
    let p = read_partition(&args.p)?;
    let q = read_partition(&args.q)?;
    let r = p.relate(&q).data("relate")?;
    println!("{r}");
    Ok(())
}

fn instrument(lo: i64, hi: i64) -> Result<InstrumentRange, CliError> {
    if lo > hi {
        return Err(CliError::Usage(format!("instrument range [{lo}, {hi}] is empty")));
    }
    Ok(InstrumentRange { lo, hi })
}

pub fn learn(args: &LearnArgs) -> Result<(), CliError> {
    if !(args.epsilon >= 0.0) {
        return Err(CliError::Usage("--epsilon must be non-negative".into()));
    }
    let range = instrument(args.range_lo, args.range_hi)?;
    let family = AbstractionFamily::read_dir(&args.family).data(&args.family.display().to_string())?;
    let window = family.window();
    let file = File::open(&args.chords).data(&args.chords.display().to_string())?;
    let chords = load_chords(BufReader::new(file), window.dim(), &range).data(&args.chords.display().to_string())?;
    let target = empirical_measure(&chords, Some(window)).data("corpus")?;

    let mut partitions = Vec::new();
    let mut labels = Vec::new();
    for (&mask, entry) in family.entries() {
        if args.include_finest || !entry.partition.is_finest() {
            partitions.push(entry.partition.clone());
            labels.push(family.subset_name(mask));
        }
    }
    if partitions.is_empty() {
        return Err(CliError::Data("the family offers no partitions to learn from".into()));
    }
    let outcome = learn_loop(&target, &partitions, &labels, args.max_rules, args.epsilon).compute("learner")?;

    fs::create_dir_all(&args.out).data(&args.out.display().to_string())?;
    let trace_path = args.out.join("trace.jsonl");
    let mut w = BufWriter::new(File::create(&trace_path).data(&trace_path.display().to_string())?);
    for record in &outcome.trace {
        let line = serde_json::to_string(record).compute("trace")?;
        writeln!(w, "{line}").data(&trace_path.display().to_string())?;
    }
    w.flush().data(&trace_path.display().to_string())?;

    println!("corpus: {} chords on {}", chords.len(), window);
    println!("candidate partitions: {}", partitions.len());
    for record in &outcome.trace {
        let gap = record.divergence.map_or_else(|| "inf".to_string(), |d| format!("{d:.6}"));
        println!("rule {}: {} divergence {gap} bits", record.k, record.subset);
    }
    let stop = match outcome.stop {
        StopReason::Converged => "converged",
        StopReason::MaxRules => "max rules reached",
    };
    println!("stop: {stop}");
    println!("target entropy: {:.6} bits", target.entropy());
    println!("final student entropy: {:.6} bits", outcome.student.entropy());
    println!("wrote {}", trace_path.display());
    Ok(())
}

pub fn label(args: &LabelArgs) -> Result<(), CliError> {
    if args.n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let range = instrument(args.range_lo, args.range_hi)?;
    let file = File::open(&args.chords).data(&args.chords.display().to_string())?;
    let chords = load_chords(BufReader::new(file), args.n, &range).data(&args.chords.display().to_string())?;
    print!("{}", label_report(&chords));
    Ok(())
}
