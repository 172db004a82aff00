//! Reference scenarios and the synthetic profile generator.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cost::{AppRequirements, ComputeNodeSpec};
use crate::scalar::Scalar;
use crate::scenario::{ConfigSpec, ProfileEntry, Scenario, MODE_PRETRAINED, MODE_UPDATE, SCHEMA_VERSION};

/// Data-source labels carried by generated configurations.
const DATA_SOURCES: [&str; 6] =
    ["GERMANY50", "NOBEL-GBN", "GEANT", "ABILENE", "GBN", "NSFNET"];

fn cpu_spec<T: Scalar>(id: &str) -> ComputeNodeSpec<T> {
    ComputeNodeSpec {
        id: id.to_string(),
        node_type: "cpu".into(),
        idle_power_w: T::from_f64_lossy(5.0),
        max_power_w: T::from_f64_lossy(12.0),
        capacity_tops: T::from_f64_lossy(2.0),
    }
}

fn t4_spec<T: Scalar>(id: &str) -> ComputeNodeSpec<T> {
    ComputeNodeSpec {
        id: id.to_string(),
        node_type: "t4-gpu".into(),
        idle_power_w: T::from_f64_lossy(36.0),
        max_power_w: T::from_f64_lossy(70.0),
        capacity_tops: T::from_f64_lossy(80.0),
    }
}

fn tpu_spec<T: Scalar>(id: &str) -> ComputeNodeSpec<T> {
    ComputeNodeSpec {
        id: id.to_string(),
        node_type: "tpu-v2".into(),
        idle_power_w: T::from_f64_lossy(53.0),
        max_power_w: T::from_f64_lossy(280.0),
        capacity_tops: T::from_f64_lossy(180.0),
    }
}

/// Two applications, four configurations, and two compute nodes (a CPU and a
/// T4 GPU) with the reference (cost, loss) table. Default targets keep both
/// applications servable and exercise the partition step: loss 30 % and
/// latency 40 s for both.
pub fn fixture_small_example<T: Scalar>() -> Scenario<T> {
    let apps = vec![
        AppRequirements {
            id: "h1".into(),
            loss_max: T::from_f64_lossy(30.0),
            latency_max: T::from_f64_lossy(40.0),
        },
        AppRequirements {
            id: "h2".into(),
            loss_max: T::from_f64_lossy(30.0),
            latency_max: T::from_f64_lossy(40.0),
        },
    ];
    let configs = vec![
        ConfigSpec {
            id: "s1".into(),
            data_source: "ABILENE".into(),
            epochs: 1,
            steps_per_epoch: 1,
            mode: MODE_PRETRAINED,
        },
        ConfigSpec {
            id: "s2".into(),
            data_source: "GEANT".into(),
            epochs: 1,
            steps_per_epoch: 5,
            mode: MODE_UPDATE,
        },
        ConfigSpec {
            id: "s3".into(),
            data_source: "GEANT".into(),
            epochs: 10,
            steps_per_epoch: 50,
            mode: MODE_UPDATE,
        },
        ConfigSpec {
            id: "s4".into(),
            data_source: "GEANT".into(),
            epochs: 20,
            steps_per_epoch: 200,
            mode: MODE_UPDATE,
        },
    ];
    let nodes = vec![cpu_spec("n1"), t4_spec("n2")];

    let table: [(&str, &str, f64, f64); 8] = [
        ("h1", "s1", 50.0, 15.0),
        ("h1", "s2", 30.0, 25.0),
        ("h1", "s3", 20.0, 40.0),
        ("h1", "s4", 10.0, 50.0),
        ("h2", "s1", 100.0, 65.0),
        ("h2", "s2", 80.0, 75.0),
        ("h2", "s3", 70.0, 20.0),
        ("h2", "s4", 60.0, 30.0),
    ];
    let profiles = table
        .iter()
        .map(|&(app, config, cost, loss)| ProfileEntry {
            app: app.into(),
            config: config.into(),
            compute_cost_tops: T::from_f64_lossy(cost),
            loss_mape: T::from_f64_lossy(loss),
        })
        .collect();

    Scenario {
        schema_version: SCHEMA_VERSION,
        applications: apps,
        configurations: configs,
        nodes,
        profiles,
    }
}

/// Seven applications, a shared pool of twenty configurations, and three
/// compute nodes of each type. Profiles come from [`generate_profiles`];
/// identical seeds produce identical scenarios. Default targets: loss 20 %,
/// latency 5 s.
pub fn fixture_large_scenario<T: Scalar>(seed: u64) -> Scenario<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let applications: Vec<AppRequirements<T>> = (1..=7)
        .map(|i| AppRequirements {
            id: format!("h{i}"),
            loss_max: T::from_f64_lossy(20.0),
            latency_max: T::from_f64_lossy(5.0),
        })
        .collect();

    let mut configurations = Vec::with_capacity(20);
    for k in 0..20usize {
        let data_source = DATA_SOURCES[k % DATA_SOURCES.len()].to_string();
        // Two pre-trained inference configurations, the rest train-and-update
        // with volumes spread over the admitted ranges.
        let (epochs, steps, mode) = if k < 2 {
            (1, 1, MODE_PRETRAINED)
        } else {
            (rng.gen_range(1..=50u32), rng.gen_range(1..=2000u32), MODE_UPDATE)
        };
        configurations.push(ConfigSpec {
            id: format!("s{}", k + 1),
            data_source,
            epochs,
            steps_per_epoch: steps,
            mode,
        });
    }

    let mut nodes = Vec::with_capacity(9);
    for i in 1..=3 {
        nodes.push(cpu_spec(&format!("n{i}")));
    }
    for i in 4..=6 {
        nodes.push(t4_spec(&format!("n{i}")));
    }
    for i in 7..=9 {
        nodes.push(tpu_spec(&format!("n{i}")));
    }

    let profiles = generate_profiles(rng.gen(), &applications, &configurations, 0.05);

    Scenario {
        schema_version: SCHEMA_VERSION,
        applications,
        configurations,
        nodes,
        profiles,
    }
}

/// Synthesizes a (cost, loss) profile table.
///
/// Cost grows affinely with training volume on top of a small per-application
/// inference cost, so pre-trained configurations are always the cheapest.
/// Loss starts at a per-application pre-trained level and decays exponentially
/// with training volume toward a per-application floor; `noise` adds seeded
/// multiplicative jitter per (application, configuration) pair and zero keeps
/// the construction exactly monotone.
pub fn generate_profiles<T: Scalar>(
    seed: u64,
    applications: &[AppRequirements<T>],
    configurations: &[ConfigSpec],
    noise: f64,
) -> Vec<ProfileEntry<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    struct AppParams {
        infer_cost: f64,
        cost_per_step: f64,
        pretrained_loss: f64,
        loss_floor: f64,
        decay_steps: f64,
    }

    let params: Vec<AppParams> = applications
        .iter()
        .map(|_| AppParams {
            infer_cost: rng.gen_range(0.5..2.0),
            cost_per_step: rng.gen_range(0.0006..0.0016),
            pretrained_loss: rng.gen_range(25.0..110.0),
            loss_floor: rng.gen_range(4.0..14.0),
            decay_steps: rng.gen_range(8_000.0..30_000.0),
        })
        .collect();

    let mut profiles = Vec::with_capacity(applications.len() * configurations.len());
    for (a, app) in applications.iter().enumerate() {
        let p = &params[a];
        for config in configurations {
            let volume = config.training_volume() as f64;
            let cost = p.infer_cost + p.cost_per_step * volume;
            let decayed = p.loss_floor
                + (p.pretrained_loss - p.loss_floor) * (-volume / p.decay_steps).exp();
            let jitter = if noise > 0.0 { rng.gen_range(-noise..noise) } else { 0.0 };
            let loss = decayed * (1.0 + jitter);
            profiles.push(ProfileEntry {
                app: app.id.clone(),
                config: config.id.clone(),
                compute_cost_tops: T::from_f64_lossy(cost),
                loss_mape: T::from_f64_lossy(loss),
            });
        }
    }
    profiles
}
