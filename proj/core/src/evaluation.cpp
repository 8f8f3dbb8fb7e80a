#include "steal/evaluation.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include "steal/errors.hpp"

namespace steal {

using json = nlohmann::json;

EvalReport roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) {
    throw DataError("roc_auc: scores and labels differ in length");
  }
  if (scores.empty()) throw DataError("roc_auc: empty input");
  long long n_pos = 0, n_neg = 0;
  for (const auto l : labels) (l ? n_pos : n_neg)++;
  if (n_pos == 0 || n_neg == 0) {
    throw DataError("roc_auc: AUC undefined, only one label class present");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });

  EvalReport report;
  report.roc.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  long long tp = 0, fp = 0;
  double auc = 0.0;
  double prev_fpr = 0.0, prev_tpr = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double threshold = scores[order[i]];
    // advance over the whole tie group at once (half credit via trapezoid)
    while (i < order.size() && scores[order[i]] == threshold) {
      (labels[order[i]] ? tp : fp)++;
      ++i;
    }
    const double fpr = static_cast<double>(fp) / static_cast<double>(n_neg);
    const double tpr = static_cast<double>(tp) / static_cast<double>(n_pos);
    auc += 0.5 * (tpr + prev_tpr) * (fpr - prev_fpr);
    report.roc.push_back({threshold, fpr, tpr});
    prev_fpr = fpr;
    prev_tpr = tpr;
  }
  report.auc = auc;
  return report;
}

EvalReport evaluate(const Autoencoder<float>& model, const DatasetIndex& test,
                    FrameProvider& frames, const PsnrConfig& cfg, LabeledScores* out) {
  if (test.split != Split::test) throw DataError("evaluate: expected the test split");
  if (test.labels.size() != test.videos.size()) {
    throw DataError("evaluate: missing labels for the test split");
  }
  LabeledScores collected;
  std::vector<VideoAuc> per_video;
  for (std::size_t vi = 0; vi < test.videos.size(); ++vi) {
    const VideoMeta& meta = test.videos[vi];
    const LabelTrack& track = test.labels[vi];
    const ScoreSeries series = score_video(model, frames, meta, cfg);
    if (series.anomaly.size() != track.labels.size()) {
      throw DataError("evaluate: score/label length mismatch for video '" +
                      meta.video_id + "'");
    }
    for (std::size_t f = 0; f < series.anomaly.size(); ++f) {
      collected.scores.push_back(series.anomaly[f]);
      collected.labels.push_back(track.labels[f]);
      collected.video_ids.push_back(meta.video_id);
      collected.frame_idx.push_back(static_cast<int>(f) + 1);
    }
    VideoAuc va;
    va.video_id = meta.video_id;
    const bool has_pos = std::any_of(track.labels.begin(), track.labels.end(),
                                     [](std::uint8_t l) { return l == 1; });
    const bool has_neg = std::any_of(track.labels.begin(), track.labels.end(),
                                     [](std::uint8_t l) { return l == 0; });
    if (has_pos && has_neg) {
      va.defined = true;
      va.auc = roc_auc(series.anomaly, track.labels).auc;
    }
    per_video.push_back(va);
  }

  EvalReport report = roc_auc(collected.scores, collected.labels);
  report.per_video = std::move(per_video);
  if (out) *out = std::move(collected);
  return report;
}

Comparison compare_models(const Autoencoder<float>& model_a,
                          const Autoencoder<float>& model_b, const DatasetIndex& test,
                          FrameProvider& frames, const PsnrConfig& cfg) {
  Comparison cmp;
  const EvalReport a = evaluate(model_a, test, frames, cfg);
  const EvalReport b = evaluate(model_b, test, frames, cfg);
  cmp.auc_a = a.auc;
  cmp.auc_b = b.auc;
  cmp.per_video_a = a.per_video;
  cmp.per_video_b = b.per_video;
  return cmp;
}

void write_report_json(const std::filesystem::path& file, const EvalReport& report) {
  json j;
  j["auc"] = report.auc;
  json roc = json::array();
  for (const auto& p : report.roc) {
    roc.push_back({{"threshold", std::isinf(p.threshold) ? json(nullptr) : json(p.threshold)},
                   {"fpr", p.fpr},
                   {"tpr", p.tpr}});
  }
  j["roc"] = roc;
  json pv = json::object();
  for (const auto& v : report.per_video) {
    pv[v.video_id] = v.defined ? json(v.auc) : json(nullptr);
  }
  j["per_video_auc"] = pv;
  std::ofstream out(file);
  if (!out) throw DataError("cannot write report: " + file.string());
  out << j.dump(2) << "\n";
}

void write_roc_csv(const std::filesystem::path& file, const EvalReport& report) {
  std::ofstream out(file);
  if (!out) throw DataError("cannot write roc csv: " + file.string());
  out << "threshold,fpr,tpr\n" << std::setprecision(17);
  for (const auto& p : report.roc) {
    if (std::isinf(p.threshold)) {
      out << "inf";
    } else {
      out << p.threshold;
    }
    out << ',' << p.fpr << ',' << p.tpr << '\n';
  }
}

void write_comparison_csv(const std::filesystem::path& file, const Comparison& cmp) {
  std::ofstream out(file);
  if (!out) throw DataError("cannot write comparison csv: " + file.string());
  out << "video,auc_a,auc_b,delta\n" << std::setprecision(17);
  out << "ALL," << cmp.auc_a << ',' << cmp.auc_b << ',' << cmp.delta() << '\n';
  for (std::size_t i = 0; i < cmp.per_video_a.size(); ++i) {
    const auto& a = cmp.per_video_a[i];
    const auto& b = cmp.per_video_b[i];
    out << a.video_id << ',';
    if (a.defined) out << a.auc;
    out << ',';
    if (b.defined) out << b.auc;
    out << ',';
    if (a.defined && b.defined) out << (b.auc - a.auc);
    out << '\n';
  }
}

std::string comparison_table(const Comparison& cmp) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  os << "video        auc_a    auc_b    delta\n";
  os << "-----------  -------  -------  -------\n";
  auto row = [&](const std::string& id, bool da, double a, bool db, double b) {
    os << std::left << std::setw(13) << id << std::right;
    if (da) {
      os << std::setw(7) << a;
    } else {
      os << std::setw(7) << "n/a";
    }
    os << "  ";
    if (db) {
      os << std::setw(7) << b;
    } else {
      os << std::setw(7) << "n/a";
    }
    os << "  ";
    if (da && db) {
      os << std::showpos << std::setw(7) << (b - a) << std::noshowpos;
    } else {
      os << std::setw(7) << "n/a";
    }
    os << "\n";
  };
  row("ALL", true, cmp.auc_a, true, cmp.auc_b);
  for (std::size_t i = 0; i < cmp.per_video_a.size(); ++i) {
    const auto& a = cmp.per_video_a[i];
    const auto& b = cmp.per_video_b[i];
    row(a.video_id, a.defined, a.auc, b.defined, b.auc);
  }
  return os.str();
}

}  // namespace steal
