use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{read, write_atomic, StoreError};
use crate::model::{rle_decode, rle_encode, MaskTube, TripletInstance, TubeBank, TubeFrame, Video};

pub const BANK_VERSION: u64 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BankDoc {
    version: u64,
    videos: Vec<VideoDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VideoDoc {
    video_id: String,
    num_frames: u32,
    height: usize,
    width: usize,
    tubes: Vec<TubeDoc>,
    triplets: Vec<TripletDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TubeDoc {
    tube_id: String,
    category: String,
    masks: Vec<MaskDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MaskDoc {
    frame: u32,
    rle: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TripletDoc {
    subject: String,
    object: String,
    relation: String,
    begin: u32,
    end: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    confidence: Option<f64>,
}

#[derive(Deserialize)]
struct VersionProbe {
    version: u64,
}

pub fn bank_to_json(bank: &TubeBank) -> String {
    let doc = BankDoc {
        version: BANK_VERSION,
        videos: bank
            .videos
            .iter()
            .map(|v| VideoDoc {
                video_id: v.video_id.clone(),
                num_frames: v.num_frames,
                height: v.height,
                width: v.width,
                tubes: v
                    .tubes
                    .iter()
                    .map(|t| TubeDoc {
                        tube_id: t.tube_id().to_owned(),
                        category: t.category().to_owned(),
                        masks: t
                            .frames()
                            .iter()
                            .map(|f| MaskDoc {
                                frame: f.index,
                                rle: rle_encode(&f.mask),
                            })
                            .collect(),
                    })
                    .collect(),
                triplets: v
                    .triplets
                    .iter()
                    .map(|t| TripletDoc {
                        subject: t.subject.clone(),
                        object: t.object.clone(),
                        relation: t.relation.clone(),
                        begin: t.begin,
                        end: t.end,
                        confidence: t.confidence,
                    })
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_string(&doc).expect("bank documents always serialize")
}

/// Parses and validates a bank document.
pub fn bank_from_json(text: &str) -> Result<TubeBank, StoreError> {
    let probe: VersionProbe = parse(text)?;
    if probe.version != BANK_VERSION {
        return Err(StoreError::Version {
            found: probe.version,
            expected: BANK_VERSION,
        });
    }
    let doc: BankDoc = parse(text)?;
    let mut videos = Vec::with_capacity(doc.videos.len());
    for v in doc.videos {
        let mut tubes = Vec::with_capacity(v.tubes.len());
        for t in v.tubes {
            let frames = t
                .masks
                .iter()
                .map(|m| {
                    Ok(TubeFrame {
                        index: m.frame,
                        mask: rle_decode(&m.rle, v.height, v.width)?,
                    })
                })
                .collect::<Result<Vec<_>, StoreError>>()?;
            tubes.push(MaskTube::new(t.tube_id, t.category, v.height, v.width, frames)?);
        }
        let triplets = v
            .triplets
            .into_iter()
            .map(|t| TripletInstance {
                video_id: v.video_id.clone(),
                subject: t.subject,
                object: t.object,
                relation: t.relation,
                begin: t.begin,
                end: t.end,
                confidence: t.confidence,
            })
            .collect();
        videos.push(Video {
            video_id: v.video_id,
            num_frames: v.num_frames,
            height: v.height,
            width: v.width,
            tubes,
            triplets,
        });
    }
    let bank = TubeBank { videos };
    bank.validate()?;
    Ok(bank)
}

pub(crate) fn parse<'a, T: Deserialize<'a>>(text: &'a str) -> Result<T, StoreError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        let inner = e.into_inner();
        StoreError::Schema {
            line: inner.line(),
            column: inner.column(),
            field,
            message: inner.to_string(),
        }
    })
}

pub fn save_bank(bank: &TubeBank, path: &Path) -> Result<(), StoreError> {
    write_atomic(path, bank_to_json(bank).as_bytes())
}

pub fn load_bank(path: &Path) -> Result<TubeBank, StoreError> {
    let bytes = read(path)?;
    let text = String::from_utf8(bytes).map_err(|e| StoreError::Schema {
        line: 0,
        column: 0,
        field: ".".into(),
        message: e.to_string(),
    })?;
    bank_from_json(&text)
}
