use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::Failure;
use tubegraph::ablation::{format_ablation, run_ablation, AblationSettings};
use tubegraph::contrastive::{build_batches, combine_loss, BatchRecord, EmbeddingRef, NegativeKind};
use tubegraph::metrics::{evaluate_banks, format_table};
use tubegraph::model::{FlowField, TubeBank, TubeEmbedding};
use tubegraph::motion::select_strong_motion;
use tubegraph::store::{
    build_index, encode_embedding, encode_flow, load_bank, load_embedding, load_flow, save_embedding, write_atomic,
    Manifest,
};
use tubegraph::synth::{make_corpus, CorpusSpec};
use tubegraph::transport::{ot_distance, SimilarityMethod};

pub fn ot(cfg: &RunConfig, a: &Path, b: &Path, plan: bool) -> Result<Value, Failure> {
    let (ha, hb) = (load_embedding(a)?, load_embedding(b)?);
    let d = ot_distance(&ha, &hb, &cfg.ot())?;
    let mut out = json!({
        "a": ha.tube_id(),
        "b": hb.tube_id(),
        "d_ot": d.distance,
        "mass": d.mass,
        "tau": cfg.tau,
        "mode": cfg.mode,
        "iterations": d.result.iterations_used,
        "converged": d.result.converged,
    });
    if plan {
        out["plan"] = serde_json::to_value(&d.result.plan)?;
    }
    Ok(out)
}

pub fn sim(cfg: &RunConfig, a: &Path, b: &Path, method: SimilarityMethod) -> Result<Value, Failure> {
    let (ha, hb) = (load_embedding(a)?, load_embedding(b)?);
    let s = method.evaluate(&ha, &hb, cfg.alpha, &cfg.ot())?;
    Ok(json!({ "a": ha.tube_id(), "b": hb.tube_id(), "method": method, "similarity": s }))
}

pub fn motion(cfg: &RunConfig, bank: &Path, flow: &Path, video: Option<&str>, tubes: &[String]) -> Result<Value, Failure> {
    let bank = load_bank(bank)?;
    let video = match video {
        Some(id) => bank.video(id).ok_or_else(|| Failure::Data(format!("no video {id:?} in the bank")))?,
        None if bank.videos.len() == 1 => &bank.videos[0],
        None => return Err(Failure::Usage("the bank holds several videos; pass --video".into())),
    };
    for t in tubes {
        if video.tube(t).is_none() {
            return Err(Failure::Data(format!("no tube {t:?} in video {:?}", video.video_id)));
        }
    }
    let flow = load_flow(flow, &video.video_id)?;
    let chosen = video.tubes.iter().filter(|t| tubes.is_empty() || tubes.iter().any(|x| x == t.tube_id()));
    let selection = select_strong_motion(chosen, &flow, cfg.gamma, cfg.edge_eps)?;
    Ok(json!({
        "video_id": video.video_id,
        "gamma": cfg.gamma,
        "passing": selection.passing,
        "scores": selection.scores,
    }))
}

fn load_flows(bank: &TubeBank, dir: &Path) -> Result<Vec<FlowField>, Failure> {
    bank.videos
        .iter()
        .map(|v| Ok(load_flow(&dir.join(format!("{}.tmkf", v.video_id)), &v.video_id)?))
        .collect()
}

pub fn sample(cfg: &RunConfig, bank_path: &Path, flows: &Path, out: &Path) -> Result<Value, Failure> {
    let bank = load_bank(bank_path)?;
    let flows = load_flows(&bank, flows)?;
    let index = build_index(&bank)?;
    let (batches, skipped) = build_batches(&bank, &index, &flows, &cfg.batch());
    std::fs::create_dir_all(out.join("embeddings"))?;
    let path_of = |id: &str| format!("embeddings/{id}.tmke");
    let mut records = Vec::with_capacity(batches.len());
    for b in &batches {
        let all = [&b.anchor.joint, &b.positive.joint]
            .into_iter()
            .chain(b.negatives.iter().map(|n| &n.embedding));
        for e in all {
            save_embedding(e, &out.join(path_of(e.tube_id())))?;
        }
        records.push(BatchRecord::from_batch(b, path_of));
    }
    let skipped: Vec<Value> = skipped
        .iter()
        .map(|s| json!({ "anchor": s.anchor, "reason": s.reason.to_string() }))
        .collect();
    let doc = json!({ "config": cfg, "batches": records, "skipped": skipped });
    write_atomic(&out.join("batches.json"), serde_json::to_string_pretty(&doc)?.as_bytes())?;
    Ok(json!({
        "batches": records.len(),
        "skipped": skipped,
        "output": out.join("batches.json"),
    }))
}

#[derive(Deserialize)]
struct BatchFile {
    batches: Vec<BatchRecord>,
}

pub fn loss(cfg: &RunConfig, batches: &Path, method: SimilarityMethod) -> Result<Value, Failure> {
    let text = std::fs::read_to_string(batches).map_err(|e| Failure::Data(format!("{}: {e}", batches.display())))?;
    let file: BatchFile = serde_json::from_str(&text).map_err(|e| Failure::Data(format!("{}: {e}", batches.display())))?;
    let root = batches.parent().map_or_else(PathBuf::new, Path::to_path_buf);
    let load = |r: &EmbeddingRef| -> Result<TubeEmbedding, Failure> {
        let e = load_embedding(&root.join(&r.path))?;
        Ok(e.with_id(r.tube_id.clone()))
    };
    let ot = cfg.ot();
    let mut rows = Vec::with_capacity(file.batches.len());
    let mut total = 0.0;
    for b in &file.batches {
        let anchor = load(&b.anchor.embedding_ref)?;
        let positive_sim = method.evaluate(&anchor, &load(&b.positive.embedding_ref)?, cfg.alpha, &ot)?;
        let mut sims: Vec<(NegativeKind, f64)> = Vec::with_capacity(b.negatives.len());
        for n in &b.negatives {
            sims.push((n.kind, method.evaluate(&anchor, &load(&n.embedding_ref)?, cfg.alpha, &ot)?));
        }
        let l = combine_loss(positive_sim, &sims, cfg.loss_mode);
        total += l;
        rows.push(json!({
            "anchor": b.anchor.embedding_ref.tube_id,
            "loss": l,
            "positive_sim": positive_sim,
            "negative_sims": sims.iter().map(|(k, s)| json!({ "kind": k, "sim": s })).collect::<Vec<_>>(),
        }));
    }
    let mean = if rows.is_empty() { 0.0 } else { total / rows.len() as f64 };
    Ok(json!({ "method": method, "loss_mode": cfg.loss_mode, "mean_loss": mean, "batches": rows }))
}

pub fn eval(pred: &Path, gt: &Path, ks: &[usize], thresholds: &[f64]) -> Result<Value, Failure> {
    if ks.contains(&0) {
        return Err(Failure::Usage("--k must be positive".into()));
    }
    let (pred, gt) = (load_bank(pred)?, load_bank(gt)?);
    let mut reports = Vec::new();
    for &thr in thresholds {
        for &k in ks {
            reports.push(evaluate_banks(&pred, &gt, k, thr)?);
        }
    }
    Ok(json!({ "reports": reports, "table": format_table(&reports) }))
}

pub fn synth(cfg: &RunConfig, out: &Path, videos: usize, frames: u32) -> Result<Value, Failure> {
    let spec = CorpusSpec {
        num_videos: videos,
        num_frames: frames,
        seed: cfg.seed,
        ..CorpusSpec::default()
    };
    let corpus = make_corpus(&spec)?;
    let mut manifest = Manifest::default();
    manifest.metadata.insert("corpus".into(), serde_json::to_value(&spec)?);
    manifest.metadata.insert("window".into(), json!(cfg.window));
    manifest.write_file(out, "bank.json", tubegraph::store::bank_to_json(&corpus.bank).as_bytes())?;
    for f in &corpus.flows {
        manifest.write_file(out, &format!("flows/{}.tmkf", f.video_id), &encode_flow(f))?;
    }
    let mut embeddings = 0;
    for video in &corpus.bank.videos {
        for (ordinal, t) in video.triplets.iter().enumerate() {
            for (role, e) in tube_embeddings(video, t, cfg.window)? {
                let name = format!("embeddings/{}.t{ordinal}.{role}.tmke", video.video_id);
                manifest.write_file(out, &name, &encode_embedding(&e))?;
                embeddings += 1;
            }
        }
    }
    write_atomic(&out.join("manifest.json"), manifest.to_json().as_bytes())?;
    Ok(json!({
        "videos": corpus.bank.videos.len(),
        "triplets": corpus.bank.videos.iter().map(|v| v.triplets.len()).sum::<usize>(),
        "embeddings": embeddings,
        "files": manifest.files.len() + 1,
        "output": out,
    }))
}

fn tube_embeddings(
    video: &tubegraph::model::Video,
    t: &tubegraph::model::TripletInstance,
    window: usize,
) -> Result<[(&'static str, TubeEmbedding); 3], Failure> {
    let pair = tubegraph::contrastive::encode_anchor(video, t, window)?;
    Ok([("sub", pair.sub), ("obj", pair.obj), ("joint", pair.joint)])
}

pub fn ablate(
    cfg: &RunConfig,
    inputs: Option<(&Path, &Path)>,
    methods: &[SimilarityMethod],
    ks: &[usize],
    viou: f64,
) -> Result<Value, Failure> {
    if ks.contains(&0) {
        return Err(Failure::Usage("--k must be positive".into()));
    }
    let (bank, flows) = match inputs {
        Some((bank, flows)) => {
            let bank = load_bank(bank)?;
            let flows = load_flows(&bank, flows)?;
            (bank, flows)
        }
        None => {
            let c = make_corpus(&CorpusSpec {
                seed: cfg.seed,
                ..CorpusSpec::default()
            })?;
            (c.bank, c.flows)
        }
    };
    let methods = if methods.is_empty() { SimilarityMethod::ALL.to_vec() } else { methods.to_vec() };
    let index = build_index(&bank)?;
    let (batches, skipped) = build_batches(&bank, &index, &flows, &cfg.batch());
    let settings = AblationSettings {
        alpha: cfg.alpha,
        ot: cfg.ot(),
        window: cfg.window,
        loss_mode: cfg.loss_mode,
        ks: ks.to_vec(),
        viou_threshold: viou,
    };
    let reports = run_ablation(&bank, &batches, &methods, &settings)?;
    let skipped: BTreeMap<String, String> = skipped
        .iter()
        .map(|s| (format!("{}.t{}", s.anchor.video_id, s.anchor.ordinal), s.reason.to_string()))
        .collect();
    Ok(json!({
        "batches": batches.len(),
        "skipped": skipped,
        "reports": reports,
        "table": format_ablation(&reports),
    }))
}
