// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License.  You
// may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or
// implied.  See the License for the specific language governing
// permissions and limitations under the License.

#include "egmmg/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "egmmg/checkpoint.hpp"
#include "egmmg/error.hpp"
#include "egmmg/kg_builder.hpp"
#include "egmmg/rng.hpp"
#include "json.hpp"

namespace egmmg::train {

Sample make_sample(std::string id, const ingest::ParsedDocument& claim,
                   const ingest::ParsedDocument& evidence, int label,
                   const features::NodeEmbedder& embedder, bool with_edge_features) {
  Sample s;
  s.id = std::move(id);
  s.label = label;
  s.claim = features::featurize(kg::build_graph(claim), embedder, with_edge_features);
  s.evidence = features::featurize(kg::build_graph(evidence), embedder, with_edge_features);
  return s;
}

std::vector<Sample> make_samples(std::span<const SyntheticExample> examples,
                                 const features::NodeEmbedder& embedder, bool with_edge_features) {
  std::vector<Sample> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) {
    out.push_back(make_sample(ex.id, ex.claim, ex.evidence, ex.label, embedder, with_edge_features));
  }
  return out;
}

model::ModelConfig TrainConfig::model_config() const {
  model::ModelConfig m;
  m.text_dim = embedding_dim;
  m.hidden_dim = hidden_dim;
  m.heads = heads;
  m.variant = variant;
  m.use_edge_features = use_edge_features;
  m.weighted_node_embeddings = weighted_node_embeddings;
  return m;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning rate must be positive");
  }
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  if (embedding_dim != 384 && embedding_dim != 768) {
    throw ConfigError("embedding dim must be 384 or 768");
  }
  if (!(train_fraction > 0.0 && train_fraction <= 1.0)) {
    throw ConfigError("train fraction must be in (0, 1]");
  }
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw ConfigError("threshold must be in [0, 1]");
  model_config().validate();
}

Split split_dataset(std::span<const int> labels, double train_fraction, std::uint64_t seed) {
  if (labels.size() < 2) throw DataError("split needs at least 2 samples");
  const double test_share = 1.0 - train_fraction;
  std::map<int, std::vector<std::size_t>> classes;
  for (std::size_t i = 0; i < labels.size(); ++i) classes[labels[i]].push_back(i);
  for (int c : {0, 1}) {
    if (!classes.contains(c)) throw DataError("split: class " + std::to_string(c) + " has no samples");
  }
  if (classes.size() != 2) throw DataError("split: labels must be 0 or 1");

  const auto total_test = static_cast<std::size_t>(
      std::llround(static_cast<double>(labels.size()) * test_share));
  if (total_test == 0) throw DataError("split leaves the test set empty");
  if (total_test >= labels.size()) throw DataError("split leaves the train set empty");

  struct Share {
    int label;
    std::size_t take;
    double remainder;
  };
  std::vector<Share> shares;
  std::size_t assigned = 0;
  for (const auto& [label, members] : classes) {
    const double exact = static_cast<double>(members.size()) * test_share;
    const auto take = static_cast<std::size_t>(std::floor(exact));
    shares.push_back({label, take, exact - static_cast<double>(take)});
    assigned += take;
  }
  std::vector<std::size_t> order(shares.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return shares[a].remainder > shares[b].remainder;
  });
  for (std::size_t k = 0; assigned < total_test && k < order.size(); ++k) {
    auto& s = shares[order[k]];
    if (s.take < classes[s.label].size()) {
      ++s.take;
      ++assigned;
    }
  }

  Rng rng(seed);
  Split split;
  for (const auto& s : shares) {
    auto members = classes[s.label];
    rng.shuffle(members);
    split.test.insert(split.test.end(), members.begin(), members.begin() + static_cast<long>(s.take));
    split.train.insert(split.train.end(), members.begin() + static_cast<long>(s.take), members.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

SeedPlan seed_plan(std::uint64_t seed) {
  Rng rng(seed);
  SeedPlan p;
  p.model = rng.next();
  p.split = rng.next();
  p.shuffle = rng.next();
  return p;
}

Split training_split(const TrainConfig& config, std::span<const Sample> samples) {
  std::vector<std::size_t> usable;
  std::vector<int> labels;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].usable()) {
      usable.push_back(i);
      labels.push_back(samples[i].label);
    }
  }
  if (usable.empty()) throw DataError("every sample has an empty graph; nothing to train on");
  auto local = split_dataset(labels, config.train_fraction, seed_plan(config.seed).split);
  for (auto& i : local.train) i = usable[i];
  for (auto& i : local.test) i = usable[i];
  return local;
}

std::string to_json_line(const EpochRecord& r) {
  nlohmann::ordered_json j;
  j["epoch"] = r.epoch;
  j["train_loss"] = r.train_loss;
  j["train_acc"] = r.train_acc;
  j["test_acc"] = r.test_acc;
  j["test_f1"] = r.test_f1;
  j["skipped"] = r.skipped;
  return j.dump();
}

EvalResult evaluate(model::Model& model, std::span<const Sample> samples,
                    std::span<const std::size_t> indices, double threshold,
                    std::size_t batch_size) {
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  EvalResult r;
  std::vector<model::GraphPair> pairs;
  std::vector<int> labels;
  for (auto i : indices) {
    if (i >= samples.size()) throw DataError("evaluate: sample index out of range");
    if (!samples[i].usable()) {
      ++r.skipped;
      continue;
    }
    pairs.push_back(samples[i].pair());
    labels.push_back(samples[i].label);
  }
  if (pairs.empty()) throw DataError("evaluate: no usable samples");
  for (std::size_t b = 0; b < pairs.size(); b += batch_size) {
    const auto n = std::min(batch_size, pairs.size() - b);
    const auto s = model.predict(std::span<const model::GraphPair>(pairs).subspan(b, n));
    r.scores.insert(r.scores.end(), s.begin(), s.end());
  }
  r.metrics = compute_metrics(r.scores, labels, threshold);
  return r;
}

EvalResult evaluate(model::Model& model, std::span<const Sample> samples, double threshold,
                    std::size_t batch_size) {
  std::vector<std::size_t> all(samples.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return evaluate(model, samples, all, threshold, batch_size);
}

namespace {

class Adam {
 public:
  Adam(const TrainConfig& c, std::vector<ad::Parameter*> params)
      : lr_(c.learning_rate), b1_(c.adam_beta1), b2_(c.adam_beta2), eps_(c.adam_eps),
        warmup_(c.warmup_steps), params_(std::move(params)) {
    for (auto* p : params_) {
      m_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
      v_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    }
  }

  void step() {
    ++t_;
    const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
    const double lr =
        t_ < warmup_ ? lr_ * static_cast<double>(t_) / static_cast<double>(warmup_) : lr_;
    for (std::size_t i = 0; i < params_.size(); ++i) {
      auto* p = params_[i];
      if (!p->trainable) continue;
      m_[i] = b1_ * m_[i] + (1.0 - b1_) * p->grad;
      v_[i] = b2_ * v_[i] + (1.0 - b2_) * p->grad.cwiseAbs2();
      p->value.array() -=
          lr * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + eps_);
    }
  }

 private:
  double lr_, b1_, b2_, eps_;
  std::size_t warmup_;
  std::vector<ad::Parameter*> params_;
  std::vector<Matrix> m_, v_;
  std::size_t t_ = 0;
};

std::vector<Matrix> snapshot(model::Model& m) {
  std::vector<Matrix> out;
  for (auto* p : m.parameters()) out.push_back(p->value);
  return out;
}

void restore(model::Model& m, const std::vector<Matrix>& values) {
  auto params = m.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = values[i];
}

}  // namespace

TrainResult train(const TrainConfig& config, std::span<const Sample> samples,
                  const EpochCallback& on_epoch) {
  config.validate();
  const auto seeds = seed_plan(config.seed);
  std::size_t skipped = 0;
  for (const auto& s : samples) {
    if (!s.usable()) ++skipped;
  }
  auto split = training_split(config, samples);

  model::Model model(config.model_config(), seeds.model);
  Adam adam(config, model.parameters());
  Rng shuffle_rng(seeds.shuffle);

  std::vector<Matrix> best = snapshot(model);
  double best_acc = -1.0;
  std::size_t best_epoch = 0;
  std::vector<EpochRecord> log;

  std::vector<std::size_t> order = split.train;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t b = 0; b < order.size(); b += config.batch_size) {
      const auto n = std::min(config.batch_size, order.size() - b);
      std::vector<model::GraphPair> pairs;
      std::vector<double> labels;
      for (std::size_t k = 0; k < n; ++k) {
        const auto& s = samples[order[b + k]];
        pairs.push_back(s.pair());
        labels.push_back(static_cast<double>(s.label));
      }
      model.zero_grad();
      try {
        ad::Tape tape;
        auto scores = model.forward(tape, pairs);
        auto loss = ad::bce_loss(scores, labels);
        if (!std::isfinite(loss.item())) throw NumericError("non-finite loss");
        tape.backward(loss);
        loss_sum += loss.item() * static_cast<double>(n);
        for (std::size_t k = 0; k < n; ++k) {
          const bool pred = scores.value()(static_cast<Eigen::Index>(k), 0) >= config.threshold;
          if (pred == (labels[k] == 1.0)) ++correct;
        }
      } catch (const NumericError& e) {
        throw NumericError("epoch " + std::to_string(epoch) + ", batch starting at " +
                           std::to_string(b) + ": " + e.what());
      }
      for (auto* p : model.parameters()) {
        if (!p->grad.allFinite()) {
          throw NumericError("epoch " + std::to_string(epoch) + ": non-finite gradient in " +
                             p->name);
        }
      }
      adam.step();
    }

    const auto test = evaluate(model, samples, split.test, config.threshold, config.batch_size);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(order.size());
    rec.train_acc = static_cast<double>(correct) / static_cast<double>(order.size());
    rec.test_acc = test.metrics.accuracy;
    rec.test_f1 = test.metrics.f1;
    rec.skipped = skipped;
    log.push_back(rec);
    if (on_epoch) on_epoch(rec);
    if (rec.test_acc > best_acc) {
      best_acc = rec.test_acc;
      best_epoch = epoch;
      best = snapshot(model);
    }
  }
  model.zero_grad();

  restore(model, best);
  model::round_to_float(model);
  TrainResult result{std::move(model), best_epoch, std::move(log), std::move(split), skipped, {}, {}};
  result.train_metrics =
      evaluate(result.model, samples, result.split.train, config.threshold, config.batch_size).metrics;
  result.test_metrics =
      evaluate(result.model, samples, result.split.test, config.threshold, config.batch_size).metrics;
  return result;
}

}  // namespace egmmg::train
