/* SPDX-License-Identifier: Apache-2.0 */

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "pcmsolve/policy.hpp"

namespace pcm {

namespace {

constexpr int kH1 = 64;
constexpr int kH2 = 32;
constexpr int kParamCount =
    kH1 * kNumFeatures + kH1 + kH2 * kH1 + kH2 + kH2 + 1;

constexpr char kMagic[4] = {'P', 'N', 'E', 'T'};
constexpr std::uint32_t kVersion = 1;

double relu(double v) { return v > 0.0 ? v : 0.0; }

}  // namespace

int policy_network::w1_off() { return 0; }
int policy_network::b1_off() { return kH1 * kNumFeatures; }
int policy_network::w2_off() { return b1_off() + kH1; }
int policy_network::b2_off() { return w2_off() + kH2 * kH1; }
int policy_network::w3_off() { return b2_off() + kH2; }
int policy_network::b3_off() { return w3_off() + kH2; }

policy_network::policy_network() : params_(kParamCount, 0.0) {}

policy_network::policy_network(std::uint64_t seed) : params_(kParamCount, 0.0)
{
  rng gen(mix_seed(0x706e6574696e6974ULL, seed));
  auto glorot = [&gen](double* w, int fan_out, int fan_in) {
    const double limit = std::sqrt(6.0 / double(fan_in + fan_out));
    for (int i = 0; i < fan_out * fan_in; ++i) w[i] = gen.uniform(-limit, limit);
  };
  glorot(params_.data() + w1_off(), kH1, kNumFeatures);
  glorot(params_.data() + w2_off(), kH2, kH1);
  glorot(params_.data() + w3_off(), 1, kH2);
}

int policy_network::parameter_count() const { return kParamCount; }

void policy_network::forward_row(const double* row, double* h1, double* h2, double* out) const
{
  const double* w1 = params_.data() + w1_off();
  const double* b1 = params_.data() + b1_off();
  const double* w2 = params_.data() + w2_off();
  const double* b2 = params_.data() + b2_off();
  const double* w3 = params_.data() + w3_off();
  const double b3 = params_[std::size_t(b3_off())];

  for (int i = 0; i < kH1; ++i) {
    double v = b1[i];
    const double* wrow = w1 + std::size_t(i) * kNumFeatures;
    for (int q = 0; q < kNumFeatures; ++q) v += wrow[q] * row[q];
    h1[i] = relu(v);
  }
  for (int i = 0; i < kH2; ++i) {
    double v = b2[i];
    const double* wrow = w2 + std::size_t(i) * kH1;
    for (int q = 0; q < kH1; ++q) v += wrow[q] * h1[q];
    h2[i] = relu(v);
  }
  double v = b3;
  for (int q = 0; q < kH2; ++q) v += w3[q] * h2[q];
  *out = v;
}

std::vector<double> policy_network::logits(const feature_matrix& f) const
{
  std::vector<double> out(f.n_rows, 0.0);
  if (parallel_kernels_enabled()) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < f.n_rows; ++i) {
      double h1[kH1], h2[kH2];
      forward_row(f.row(i), h1, h2, &out[i]);
    }
  } else {
    for (int i = 0; i < f.n_rows; ++i) {
      double h1[kH1], h2[kH2];
      forward_row(f.row(i), h1, h2, &out[i]);
    }
  }
  return out;
}

std::vector<double> policy_network::action_probabilities(const feature_matrix& f) const
{
  std::vector<double> p = logits(f);
  if (p.empty()) return p;
  const double shift = *std::max_element(p.begin(), p.end());
  double total = 0.0;
  for (double& v : p) {
    v = std::exp(v - shift);
    total += v;
  }
  for (double& v : p) v /= total;
  return p;
}

int policy_network::argmax_action(const feature_matrix& f) const
{
  const std::vector<double> l = logits(f);
  if (l.empty()) throw std::invalid_argument("argmax_action on an empty candidate set");
  int best = 0;
  for (int i = 1; i < int(l.size()); ++i)
    if (l[i] > l[best]) best = i;
  return best;
}

int policy_network::sample_action(const feature_matrix& f, rng& gen) const
{
  const std::vector<double> p = action_probabilities(f);
  if (p.empty()) throw std::invalid_argument("sample_action on an empty candidate set");
  return gen.categorical(p);
}

std::vector<double> policy_network::grad_log_prob(const feature_matrix& f, int action) const
{
  if (action < 0 || action >= f.n_rows)
    throw std::invalid_argument("grad_log_prob: action out of range");
  const std::vector<double> p = action_probabilities(f);

  std::vector<double> grad(kParamCount, 0.0);
  const double* w2 = params_.data() + w2_off();
  const double* w3 = params_.data() + w3_off();

  // d log p(action) / d theta = sum_i (1{i==action} - p_i) d logit_i / d theta;
  // rows accumulate serially in order so the result does not depend on
  // scheduling
  double h1[kH1], h2[kH2], out;
  double d2[kH2], d1[kH1];
  for (int i = 0; i < f.n_rows; ++i) {
    const double coeff = (i == action ? 1.0 : 0.0) - p[i];
    if (coeff == 0.0) continue;
    const double* row = f.row(i);
    forward_row(row, h1, h2, &out);

    for (int q = 0; q < kH2; ++q) d2[q] = h2[q] > 0.0 ? w3[q] : 0.0;
    for (int q = 0; q < kH1; ++q) {
      double v = 0.0;
      if (h1[q] > 0.0)
        for (int r = 0; r < kH2; ++r) v += d2[r] * w2[std::size_t(r) * kH1 + q];
      d1[q] = v;
    }

    double* g1 = grad.data() + w1_off();
    double* gb1 = grad.data() + b1_off();
    double* g2 = grad.data() + w2_off();
    double* gb2 = grad.data() + b2_off();
    double* g3 = grad.data() + w3_off();
    for (int q = 0; q < kH1; ++q) {
      const double c = coeff * d1[q];
      if (c != 0.0) {
        double* wrow = g1 + std::size_t(q) * kNumFeatures;
        for (int r = 0; r < kNumFeatures; ++r) wrow[r] += c * row[r];
        gb1[q] += c;
      }
    }
    for (int q = 0; q < kH2; ++q) {
      const double c = coeff * d2[q];
      if (c != 0.0) {
        double* wrow = g2 + std::size_t(q) * kH1;
        for (int r = 0; r < kH1; ++r) wrow[r] += c * h1[r];
        gb2[q] += c;
      }
    }
    for (int q = 0; q < kH2; ++q) g3[q] += coeff * h2[q];
    grad[std::size_t(b3_off())] += coeff;
  }
  return grad;
}

void policy_network::save(const std::string& path) const
{
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  out.write(kMagic, 4);
  const std::uint32_t version = kVersion;
  out.write(reinterpret_cast<const char*>(&version), sizeof version);
  const std::uint64_t hash = feature_schema_hash();
  out.write(reinterpret_cast<const char*>(&hash), sizeof hash);
  const std::uint32_t dims[4] = {kNumFeatures, kH1, kH2, 1};
  out.write(reinterpret_cast<const char*>(dims), sizeof dims);
  out.write(reinterpret_cast<const char*>(params_.data()),
            std::streamsize(params_.size() * sizeof(double)));
  if (!out) throw std::runtime_error("write failed: " + path);
}

policy_network policy_network::load(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("not a policy network file: " + path);
  std::uint32_t version = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  if (!in || version != kVersion)
    throw std::runtime_error("unsupported policy network version in " + path);
  std::uint64_t hash = 0;
  in.read(reinterpret_cast<char*>(&hash), sizeof hash);
  if (!in || hash != feature_schema_hash())
    throw std::runtime_error("feature schema mismatch in " + path);
  std::uint32_t dims[4] = {0, 0, 0, 0};
  in.read(reinterpret_cast<char*>(dims), sizeof dims);
  if (!in || dims[0] != kNumFeatures || dims[1] != kH1 || dims[2] != kH2 || dims[3] != 1)
    throw std::runtime_error("unexpected layer sizes in " + path);

  policy_network net;
  in.read(reinterpret_cast<char*>(net.params_.data()),
          std::streamsize(net.params_.size() * sizeof(double)));
  if (!in || in.gcount() != std::streamsize(net.params_.size() * sizeof(double)))
    throw std::runtime_error("truncated policy network file: " + path);
  return net;
}

branching_rule make_policy_rule(const policy_network& net, policy_mode mode, rng* gen)
{
  if (mode == policy_mode::sample && gen == nullptr)
    throw std::invalid_argument("sampling mode needs a random stream");
  return [&net, mode, gen](const node_view& node) {
    const feature_matrix f = featurize(node);
    const int action =
        mode == policy_mode::greedy ? net.argmax_action(f) : net.sample_action(f, *gen);
    branch_decision d;
    d.col = node.candidates[action];
    return d;
  };
}

}  // namespace pcm
