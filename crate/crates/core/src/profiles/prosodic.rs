use crate::interchange::{FeatureConfig, SpeakerTokens};

/// Inter-word gaps strictly longer than this count as pauses.
pub const PAUSE_THRESHOLD_S: f64 = 0.150;

// Token times are stored with microsecond precision, so a gap that should be
// exactly 150 ms can come out a hair above it.
const GAP_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ProsodicMetrics {
    pub speech_rate: Option<f64>,
    pub pause_rate: Option<f64>,
    pub vowel_duration_cv: Option<f64>,
}

/// Speech rate over summed phone time, pause rate over inter-word gaps
/// within utterances, and the coefficient of variation of vowel durations.
pub fn prosodic_metrics(speaker: &SpeakerTokens, fc: Option<&FeatureConfig>) -> ProsodicMetrics {
    let mut out = ProsodicMetrics::default();

    let n = speaker.n_phones();
    let total: f64 = speaker.phones().map(|p| p.duration()).sum();
    if n > 0 && total > 0.0 {
        out.speech_rate = Some(n as f64 / total);
    }

    let mut gaps = 0usize;
    let mut pauses = 0usize;
    for utt in &speaker.utterances {
        for w in utt.words.windows(2) {
            gaps += 1;
            if w[1].start_s - w[0].end_s > PAUSE_THRESHOLD_S + GAP_EPS {
                pauses += 1;
            }
        }
    }
    if gaps > 0 {
        out.pause_rate = Some(pauses as f64 / gaps as f64);
    }

    if let Some(fc) = fc {
        let durs: Vec<f64> = speaker
            .phones()
            .filter(|p| fc.is_vowel(&p.label))
            .map(|p| p.duration())
            .collect();
        if durs.len() >= 2 {
            let m = crate::stats::mean(&durs);
            if m > 0.0 {
                out.vowel_duration_cv = Some(crate::stats::sample_sd(&durs) / m);
            }
        }
    }
    out
}
