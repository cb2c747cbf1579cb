use super::tube::MaskTube;
use super::ModelError;

/// A `(subject, relation, object)` assertion grounded by two tubes of one
/// video over an inclusive frame span.
#[derive(Debug, Clone, PartialEq)]
pub struct TripletInstance {
    pub video_id: String,
    pub subject: String,
    pub object: String,
    pub relation: String,
    pub begin: u32,
    pub end: u32,
    /// Only set on predicted triplets.
    pub confidence: Option<f64>,
}

/// Category triple used to group triplets into families.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FamilyKey {
    pub subject: String,
    pub relation: String,
    pub object: String,
}

impl FamilyKey {
    pub fn new(subject: &str, relation: &str, object: &str) -> Self {
        Self {
            subject: subject.to_owned(),
            relation: relation.to_owned(),
            object: object.to_owned(),
        }
    }

    /// Number of positions (subject, relation, object) that agree.
    pub fn shared_components(&self, other: &FamilyKey) -> usize {
        usize::from(self.subject == other.subject)
            + usize::from(self.relation == other.relation)
            + usize::from(self.object == other.object)
    }
}

impl std::fmt::Display for FamilyKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {})", self.subject, self.relation, self.object)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Video {
    pub video_id: String,
    pub num_frames: u32,
    pub height: usize,
    pub width: usize,
    pub tubes: Vec<MaskTube>,
    pub triplets: Vec<TripletInstance>,
}

impl Video {
    pub fn tube(&self, tube_id: &str) -> Option<&MaskTube> {
        self.tubes.iter().find(|t| t.tube_id() == tube_id)
    }

    /// Subject and object tubes of a triplet.
    pub fn triplet_tubes(
        &self,
        triplet: &TripletInstance,
    ) -> Result<(&MaskTube, &MaskTube), ModelError> {
        let find = |id: &str| {
            self.tube(id).ok_or_else(|| ModelError::UnknownTube {
                video_id: self.video_id.clone(),
                tube_id: id.to_owned(),
            })
        };
        Ok((find(&triplet.subject)?, find(&triplet.object)?))
    }

    pub fn family(&self, triplet: &TripletInstance) -> Result<FamilyKey, ModelError> {
        let (s, o) = self.triplet_tubes(triplet)?;
        Ok(FamilyKey::new(s.category(), &triplet.relation, o.category()))
    }

    /// Checks every invariant a loaded or generated video must satisfy.
    pub fn validate(&self) -> Result<(), ModelError> {
        for tube in &self.tubes {
            if (tube.height(), tube.width()) != (self.height, self.width) {
                return Err(ModelError::DimensionMismatch {
                    expected: (self.height, self.width),
                    found: tube.height() * tube.width(),
                });
            }
            if let Some((_, last)) = tube.span() {
                if last >= self.num_frames {
                    return Err(ModelError::FrameOutOfRange {
                        tube_id: tube.tube_id().to_owned(),
                        index: last,
                        num_frames: self.num_frames,
                    });
                }
            }
        }
        for (i, a) in self.tubes.iter().enumerate() {
            if self.tubes[..i].iter().any(|b| b.tube_id() == a.tube_id()) {
                return Err(ModelError::DuplicateTube(a.tube_id().to_owned()));
            }
        }
        self.check_disjoint()?;
        for t in &self.triplets {
            if t.subject == t.object {
                return Err(ModelError::InvalidTriplet {
                    video_id: self.video_id.clone(),
                    reason: format!("subject and object are both {}", t.subject),
                });
            }
            if t.begin > t.end {
                return Err(ModelError::InvalidTriplet {
                    video_id: self.video_id.clone(),
                    reason: format!("span {}..{} is reversed", t.begin, t.end),
                });
            }
            let (s, o) = self.triplet_tubes(t)?;
            for tube in [s, o] {
                if !tube.covers(t.begin, t.end) {
                    return Err(ModelError::InvalidTriplet {
                        video_id: self.video_id.clone(),
                        reason: format!(
                            "tube {} does not cover frames {}..={}",
                            tube.tube_id(),
                            t.begin,
                            t.end
                        ),
                    });
                }
            }
            if let Some(c) = t.confidence {
                if !c.is_finite() {
                    return Err(ModelError::InvalidTriplet {
                        video_id: self.video_id.clone(),
                        reason: "confidence is not finite".into(),
                    });
                }
            }
        }
        Ok(())
    }

    fn check_disjoint(&self) -> Result<(), ModelError> {
        for frame in 0..self.num_frames {
            let masks: Vec<(&str, _)> = self
                .tubes
                .iter()
                .filter_map(|t| t.mask_at(frame).map(|m| (t.tube_id(), m)))
                .collect();
            for (i, (ida, a)) in masks.iter().enumerate() {
                for (idb, b) in &masks[i + 1..] {
                    if a.overlaps(b) {
                        return Err(ModelError::DisjointnessViolation {
                            video_id: self.video_id.clone(),
                            frame,
                            first: (*ida).to_owned(),
                            second: (*idb).to_owned(),
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

/// A collection of annotated videos.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TubeBank {
    pub videos: Vec<Video>,
}

/// Addresses one triplet of a bank.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
pub struct TripletRef {
    pub video_id: String,
    pub ordinal: usize,
}

impl TubeBank {
    pub fn video(&self, video_id: &str) -> Option<&Video> {
        self.videos.iter().find(|v| v.video_id == video_id)
    }

    pub fn triplet(&self, r: &TripletRef) -> Result<(&Video, &TripletInstance), ModelError> {
        let video = self
            .video(&r.video_id)
            .ok_or_else(|| ModelError::UnknownVideo(r.video_id.clone()))?;
        let triplet = video
            .triplets
            .get(r.ordinal)
            .ok_or_else(|| ModelError::UnknownTriplet(r.clone()))?;
        Ok((video, triplet))
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for (i, v) in self.videos.iter().enumerate() {
            if self.videos[..i].iter().any(|w| w.video_id == v.video_id) {
                return Err(ModelError::DuplicateVideo(v.video_id.clone()));
            }
            v.validate()?;
        }
        Ok(())
    }
}
