//! End-to-end grounding: enhancement, multi-level interactions, matching
//! scores, and localization, with game values computed directly.

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alignment::{
    contrastive_loss, enhance, game_distribution, kld_loss, matching_degree, video_score,
    word_alignment_loss, LossReport, LossWeights, MatchProfile,
};
use crate::embedding::{
    pairwise_interaction_grid, self_modal_game, sentence_level_interaction, CrossModalGameSpec,
    EmbeddingSequence, InteractionGrid, Mode,
};
use crate::error::Result;
use crate::exact::Enumerator;
use crate::localization::{localize, predictions_to_seconds, LocalizerConfig, Moment, TimedMoment};
use crate::metrics::{EvalRecord, Interval};
use crate::sampling::sampled_value;
use crate::synthetic::GroundingCase;

/// Which features the cross-modal games are played on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum FeatureSource {
    #[default]
    Enhanced,
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pipeline {
    pub mode: Mode,
    pub localizer: LocalizerConfig,
    pub features: FeatureSource,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub word_grid: InteractionGrid,
    pub phrase_grid: InteractionGrid,
    pub sentence: Vec<f64>,
    pub profile: MatchProfile,
    pub moments: Vec<Moment>,
    pub timed: Vec<TimedMoment>,
}

/// Features of one side after the optional self-modal enhancement.
#[derive(Debug, Clone)]
struct Prepared {
    visual: EmbeddingSequence,
    words: EmbeddingSequence,
}

impl Pipeline {
    pub fn new(mode: Mode, localizer: LocalizerConfig) -> Self {
        Self {
            mode,
            localizer,
            features: FeatureSource::Enhanced,
        }
    }

    fn prepare(&self, case: &GroundingCase) -> Result<Prepared> {
        match self.features {
            FeatureSource::Raw => Ok(Prepared {
                visual: case.visual.clone(),
                words: case.words.clone(),
            }),
            FeatureSource::Enhanced => Ok(Prepared {
                visual: enhance(&case.visual, self.mode)?.to_sequence()?,
                words: enhance(&case.words, self.mode)?.to_sequence()?,
            }),
        }
    }

    fn score(
        &self,
        visual: &EmbeddingSequence,
        query: &Prepared,
        case: &GroundingCase,
    ) -> Result<Interactions> {
        let word_grid = pairwise_interaction_grid(
            &CrossModalGameSpec::new(visual.clone(), query.words.clone())?,
            self.mode,
        )?;
        let phrase_grid = pairwise_interaction_grid(
            &CrossModalGameSpec::new(visual.clone(), case.phrases.clone())?,
            self.mode,
        )?;
        let sentence = sentence_level_interaction(visual, &case.sentence, self.mode)?;
        let matching = matching_degree(&word_grid, &phrase_grid, &sentence)?;
        let profile = video_score(&matching, &sentence)?;
        Ok(Interactions {
            word_grid,
            phrase_grid,
            sentence,
            profile,
        })
    }

    pub fn run(&self, case: &GroundingCase) -> Result<PipelineOutput> {
        let prepared = self.prepare(case)?;
        let Interactions {
            word_grid,
            phrase_grid,
            sentence,
            profile,
        } = self.score(&prepared.visual, &prepared, case)?;
        let moments = localize(&profile.per_frame, &self.localizer)?;
        let timed = predictions_to_seconds(&moments, case.duration_s, case.frames())?;
        Ok(PipelineOutput {
            word_grid,
            phrase_grid,
            sentence,
            profile,
            moments,
            timed,
        })
    }

    /// Runs every case in parallel; output order follows input order.
    pub fn run_batch(&self, cases: &[GroundingCase]) -> Vec<Result<PipelineOutput>> {
        cases.par_iter().map(|c| self.run(c)).collect()
    }

    /// `scores[[k, l]]` is the video-sentence score of video `k` against query `l`.
    pub fn score_matrix(&self, cases: &[GroundingCase]) -> Result<Array2<f64>> {
        let prepared = cases
            .par_iter()
            .map(|c| self.prepare(c))
            .collect::<Result<Vec<_>>>()?;
        let n = cases.len();
        let cells: Vec<(usize, usize)> = (0..n).flat_map(|k| (0..n).map(move |l| (k, l))).collect();
        let scores = cells
            .par_iter()
            .map(|&(k, l)| {
                self.score(&prepared[k].visual, &prepared[l], &cases[l])
                    .map(|s| s.profile.video_score)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Array2::from_shape_vec((n, n), scores).expect("square"))
    }

    /// Loss summary over a batch. The pipeline's own game values play the role
    /// of predictions and exact enumeration provides the targets, so in exact
    /// mode the self-relevance and alignment terms vanish.
    pub fn batch_losses(
        &self,
        cases: &[GroundingCase],
        temperature: f64,
        weights: &LossWeights,
    ) -> Result<LossReport> {
        let exact = Pipeline {
            mode: Mode::Exact(self.mode.kind()),
            ..*self
        };
        let per_case = cases
            .par_iter()
            .map(|case| {
                let mut l_self = 0.0;
                for seq in [&case.visual, &case.words] {
                    let target = game_distribution(&self_values(seq, exact.mode)?)?;
                    let predicted = game_distribution(&self_values(seq, self.mode)?)?;
                    l_self += kld_loss(&predicted, &target)?;
                }
                let predicted = self.run(case)?;
                let target = exact.run(case)?;
                let sentence_col =
                    |s: &[f64]| Array2::from_shape_vec((s.len(), 1), s.to_vec()).expect("column");
                let sentence_target = InteractionGrid {
                    values: sentence_col(&target.sentence),
                    kind: target.word_grid.kind,
                };
                let l_align = word_alignment_loss(&predicted.word_grid.values, &target.word_grid)?
                    + word_alignment_loss(&predicted.phrase_grid.values, &target.phrase_grid)?
                    + word_alignment_loss(&sentence_col(&predicted.sentence), &sentence_target)?;
                Ok((l_self, l_align))
            })
            .collect::<Result<Vec<(f64, f64)>>>()?;
        let n = cases.len().max(1) as f64;
        let l_self = per_case.iter().map(|p| p.0).sum::<f64>() / n;
        let l_align = per_case.iter().map(|p| p.1).sum::<f64>() / n;
        let l_c = contrastive_loss(&self.score_matrix(cases)?, temperature)?;
        LossReport::new(l_self, l_align, l_c, weights)
    }
}

struct Interactions {
    word_grid: InteractionGrid,
    phrase_grid: InteractionGrid,
    sentence: Vec<f64>,
    profile: MatchProfile,
}

/// Self-modal game values of every element under `mode`.
pub fn self_values(seq: &EmbeddingSequence, mode: Mode) -> Result<Vec<f64>> {
    let game = self_modal_game(seq)?;
    match mode {
        Mode::Exact(kind) => Ok(Enumerator::default().values(&game, kind)?.values),
        Mode::Sampled(plan) => (0..seq.len())
            .map(|p| sampled_value(&game, p, &plan).map(|r| r.estimate))
            .collect(),
    }
}

/// Pairs ranked predictions (in seconds) with the case's planted span.
pub fn eval_record(case: &GroundingCase, timed: &[TimedMoment]) -> Result<EvalRecord> {
    let predictions = timed
        .iter()
        .map(|m| Interval::new(m.start_s, m.end_s))
        .collect::<Result<_>>()?;
    Ok(EvalRecord {
        id: case.id.clone(),
        predictions,
        ground_truth: case.truth_interval(),
    })
}

pub fn run_pipeline(
    case: &GroundingCase,
    mode: Mode,
    localizer: LocalizerConfig,
) -> Result<PipelineOutput> {
    Pipeline::new(mode, localizer).run(case)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::ValueKind;
    use crate::sampling::SamplingPlan;
    use crate::synthetic::{generate, FrameSpan, MomentPlacement, SyntheticConfig};

    fn localizer() -> LocalizerConfig {
        LocalizerConfig::new(0.8, 5).unwrap()
    }

    #[test]
    fn noiseless_planted_moment() {
        let cfg = SyntheticConfig {
            frames: 6,
            words: 3,
            noise_sigma: 0.0,
            moment: MomentPlacement::Fixed(FrameSpan { start: 2, end: 4 }),
            pairs: 5,
            seed: 3,
            ..Default::default()
        };
        for case in generate(&cfg).unwrap() {
            let out = run_pipeline(&case, Mode::Exact(ValueKind::Banzhaf), localizer()).unwrap();
            let top = out.moments[0];
            assert_eq!((top.start, top.end), (2, 4), "{:?}", out.profile.per_frame);
            assert_eq!(out.timed[0].start_s, 10.0);
        }
    }

    #[test]
    fn identical_frames_span_everything() {
        let mut case = generate(&SyntheticConfig {
            pairs: 1,
            dim: 16,
            ..Default::default()
        })
        .unwrap()
        .remove(0);
        let frame = case.visual.vectors()[0].clone();
        case.visual = EmbeddingSequence::visual(vec![frame; 6]).unwrap();
        let out = run_pipeline(&case, Mode::Exact(ValueKind::Shapley), localizer()).unwrap();
        assert_eq!((out.moments[0].start, out.moments[0].end), (0, 5));
    }

    #[test]
    fn exact_batch_has_zero_self_and_alignment_losses() {
        let cases = generate(&SyntheticConfig {
            pairs: 3,
            dim: 32,
            noise_sigma: 0.0,
            ..Default::default()
        })
        .unwrap();
        let p = Pipeline::new(Mode::Exact(ValueKind::Banzhaf), localizer());
        let report = p
            .batch_losses(&cases, 0.1, &LossWeights::default())
            .unwrap();
        assert_eq!(report.l_self, 0.0);
        assert!(report.l_align.abs() < 1e-15);
        assert!(report.l_c > 0.0);
        assert_eq!(report.total, report.l_c + report.l_align);

        let plan = SamplingPlan::new(300, 1, ValueKind::Banzhaf).unwrap();
        let sampled = Pipeline::new(Mode::Sampled(plan), localizer())
            .batch_losses(&cases, 0.1, &LossWeights::default())
            .unwrap();
        assert!(sampled.l_self > 0.0 && sampled.l_align > 0.0);
    }

    #[test]
    fn raw_features_option() {
        let case = generate(&SyntheticConfig {
            pairs: 1,
            dim: 32,
            ..Default::default()
        })
        .unwrap()
        .remove(0);
        let mut p = Pipeline::new(Mode::Exact(ValueKind::Banzhaf), localizer());
        let enhanced = p.run(&case).unwrap();
        p.features = FeatureSource::Raw;
        let raw = p.run(&case).unwrap();
        assert_ne!(enhanced.profile.per_frame, raw.profile.per_frame);
    }
}
