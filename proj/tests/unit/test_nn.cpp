#include <cmath>
#include <filesystem>
#include <limits>

#include "doctest.h"
#include "hexit/core/rng.hpp"
#include "hexit/nn/checkpoint.hpp"
#include "hexit/nn/evaluator.hpp"
#include "hexit/nn/losses.hpp"
#include "hexit/nn/network.hpp"
#include "hexit/nn/training.hpp"

using namespace hexit;
using namespace hexit::nn;

namespace {

NetworkConfig tiny(int n, bool value, uint64_t seed = 1) {
  NetworkConfig c;
  c.board_size = n;
  c.filters = 3;
  c.layers = {{3, true}, {3, false}, {1, false}};
  c.value_heads = value;
  c.seed = seed;
  return c;
}

Board random_position(int n, Rng& rng) {
  Board b(n);
  const int plies = uniform_int(rng, n * n / 2 + 1);
  for (int p = 0; p < plies && !b.terminal(); ++p) {
    const auto moves = b.legal_moves();
    b.apply(moves[static_cast<size_t>(uniform_int(rng, static_cast<int>(moves.size())))]);
  }
  if (b.terminal()) return Board(n);
  return b;
}

Example random_example(int n, Rng& rng, bool value) {
  Example e;
  e.position = random_position(n, rng);
  const auto legal = e.position.legal_mask();
  e.target.assign(legal.size(), 0.0);
  double total = 0;
  for (size_t i = 0; i < legal.size(); ++i) {
    if (legal[i]) total += e.target[i] = uniform_real(rng) + 0.01;
  }
  for (double& t : e.target) t /= total;
  for (size_t i = 0; i < legal.size(); ++i) {
    if (legal[i]) e.chosen_cell = static_cast<int>(i);
  }
  if (value) e.value_target = uniform_real(rng);
  e.weight = 0.5 + uniform_real(rng);
  return e;
}

double max_relative_error(Network<double>& net, const std::vector<Example>& batch, const LossConfig& loss) {
  std::vector<double> grad;
  compute_gradient(net, std::span<const Example>(batch), loss, grad);
  double worst = 0.0;
  const double h = 1e-6;
  for (size_t i = 0; i < net.params().size(); ++i) {
    if (net.is_masked_tap(i)) {
      CHECK(grad[i] == 0.0);
      continue;
    }
    const double saved = net.params()[i];
    net.params()[i] = saved + h;
    const double up = batch_loss(net, std::span<const Example>(batch), loss);
    net.params()[i] = saved - h;
    const double down = batch_loss(net, std::span<const Example>(batch), loss);
    net.params()[i] = saved;
    const double fd = (up - down) / (2 * h);
    const double err = std::abs(fd - grad[i]) / std::max({std::abs(fd), std::abs(grad[i]), 1e-4});
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace

TEST_CASE("masked softmax") {
  const std::vector<double> logits = {1.0, 0.0};
  const std::vector<uint8_t> both = {1, 1};
  const auto p = masked_softmax(logits, both, 0.1);
  CHECK(p[0] == doctest::Approx(1.0 / (1.0 + std::exp(-10.0))).epsilon(1e-12));
  CHECK(p[0] == doctest::Approx(0.99995).epsilon(1e-5));
  CHECK(p[1] == doctest::Approx(0.0000454).epsilon(1e-2));
  const std::vector<uint8_t> first = {1, 0};
  CHECK(masked_softmax(logits, first, 1.0)[1] == 0.0);
  const std::vector<uint8_t> none = {0, 0};
  CHECK_THROWS_AS(masked_softmax(logits, none, 1.0), std::invalid_argument);
  // Large logits stay finite.
  const std::vector<double> big = {1000.0, 999.0};
  const auto q = masked_softmax(big, both, 1.0);
  CHECK(q[0] + q[1] == doctest::Approx(1.0));
}

TEST_CASE("losses") {
  const std::vector<double> uniform(25, 1.0 / 25);
  const std::vector<uint8_t> legal(25, 1);
  CHECK(loss_cat(uniform, 7) == doctest::Approx(std::log(25.0)));
  CHECK(loss_cat(uniform, 7) == doctest::Approx(3.2189).epsilon(1e-4));
  CHECK(loss_tpt(uniform, uniform, legal) == doctest::Approx(std::log(25.0)));
  CHECK(loss_value(0.5, 1.0) == doctest::Approx(std::log(2.0)));
  CHECK(loss_value(0.5, 0.0) == doctest::Approx(0.6931).epsilon(1e-4));
  const std::vector<double> zero_mass = {1.0, 0.0};
  CHECK(std::isfinite(loss_cat(zero_mass, 1)));
  CHECK(loss_cat(zero_mass, 1) == doctest::Approx(-std::log(kLogFloor)));
  CHECK(std::isfinite(loss_value(0.0, 1.0)));

  std::vector<uint8_t> mask(25, 1);
  mask[3] = 0;
  std::vector<double> target(25, 0.0);
  target[3] = 1.0;
  CHECK_THROWS_AS(loss_tpt(uniform, target, mask), std::invalid_argument);
  CHECK(loss_multitask(uniform, uniform, legal, 0.5, 1.0) == doctest::Approx(std::log(25.0) + std::log(2.0)));
}

TEST_CASE("architecture presets") {
  const NetworkConfig p = NetworkConfig::full(9);
  REQUIRE(p.layers.size() == 13);
  CHECK(p.filters == 64);
  for (int l = 0; l < 8; ++l) CHECK(p.layers[l] == ConvSpec{3, true});
  CHECK(p.layers[8] == ConvSpec{3, false});
  CHECK(p.layers[9] == ConvSpec{3, false});
  CHECK(p.layers[10].kernel == 1);
  CHECK(p.layers[11] == ConvSpec{3, true});
  CHECK(p.layers[12].kernel == 1);
  // 13 wide input, two valid layers remove 4: the heads see 9x9 features.
  CHECK(p.spatial_sides().back() == 9);
  const Network<float> net(p);
  CHECK(net.tensor_info("policy_black.weight").shape == std::vector<int>{81, 64 * 81});
  CHECK(net.tensor_info("conv1.weight").shape == std::vector<int>{64, 6, 3, 3});
  CHECK(net.tensor_info("conv1.bias").shape == std::vector<int>{64, 13, 13});
  CHECK_THROWS(net.tensor_info("value_black.weight"));
}

TEST_CASE("forward pass outputs") {
  Rng rng(2);
  const Network<double> net(tiny(4, true));
  for (int k = 0; k < 30; ++k) {
    const Board b = random_position(4, rng);
    const Output o = net.forward(encode(b), b.legal_mask(), b.to_move(), 1.0);
    double sum = 0;
    for (int c = 0; c < 16; ++c) {
      if (b.at(c) != Cell::Empty) CHECK(o.policy[c] == 0.0);
      sum += o.policy[c];
    }
    CHECK(sum == doctest::Approx(1.0));
    REQUIRE(o.value.has_value());
    CHECK(*o.value > 0.0);
    CHECK(*o.value < 1.0);
  }
}

TEST_CASE("the colour to move selects the policy head") {
  const Network<double> net(tiny(3, false));
  const Board b(3);
  const auto x = encode(b);
  const auto legal = b.legal_mask();
  const Output black = net.forward(x, legal, Color::Black, 1.0);
  const Output white = net.forward(x, legal, Color::White, 1.0);
  CHECK(black.policy != white.policy);
}

TEST_CASE("hexagonal kernels keep their corner taps at zero") {
  Network<double> net(tiny(3, false));
  const auto w = net.tensor("conv1.weight");
  for (size_t k = 0; k < w.size(); k += 9) {
    CHECK(w[k + 0] == 0.0);
    CHECK(w[k + 8] == 0.0);
    CHECK(w[k + 2] != 0.0);
    CHECK(w[k + 6] != 0.0);
  }
  size_t masked = 0;
  for (size_t i = 0; i < net.params().size(); ++i) masked += net.is_masked_tap(i);
  CHECK(masked == 2u * 3 * (6 + 3));  // two 3x3 layers, 1x1 layer unmasked
}

TEST_CASE("analytic gradients match finite differences") {
  Rng rng(31);
  std::vector<Example> batch;
  for (int k = 0; k < 4; ++k) batch.push_back(random_example(3, rng, true));

  SUBCASE("policy and value heads, TPT") {
    Network<double> net(tiny(3, true, 5));
    CHECK(max_relative_error(net, batch, {PolicyTarget::tpt, true}) <= 1e-4);
  }
  SUBCASE("policy only, CAT") {
    Network<double> net(tiny(3, false, 6));
    CHECK(max_relative_error(net, batch, {PolicyTarget::cat, false}) <= 1e-4);
  }
  SUBCASE("padded 1x1 tail") {
    NetworkConfig c = tiny(3, true, 7);
    c.layers = {{3, true}, {1, true}, {3, true}};
    Network<double> net(c);
    CHECK(max_relative_error(net, batch, {PolicyTarget::tpt, true}) <= 1e-4);
  }
}

TEST_CASE("early stopping rule") {
  EarlyStopping s(3);
  const double losses[] = {5, 4, 3, 3.5, 3.6, 3.7, 1.0};
  bool stopped = false;
  int epoch = 0;
  for (double l : losses) {
    ++epoch;
    if (s.observe(l)) {
      stopped = true;
      break;
    }
  }
  CHECK(stopped);
  CHECK(epoch == 6);
  CHECK(s.anchor_epoch() == 3);

  EarlyStopping flat(3);
  for (double l : {2.0, 2.0, 2.0, 2.0, 2.0}) CHECK_FALSE(flat.observe(l));
  CHECK(flat.anchor_epoch() == 5);

  EarlyStopping interrupted(3);
  for (double l : {3.0, 3.1, 3.2, 3.0, 3.1, 3.2}) CHECK_FALSE(interrupted.observe(l));
  CHECK(interrupted.rises() == 2);
  CHECK(interrupted.observe(3.3));
  CHECK(interrupted.anchor_epoch() == 4);
}

TEST_CASE("training keeps the anchor epoch's parameters") {
  Rng rng(8);
  std::vector<Example> train_set, validation;
  for (int k = 0; k < 60; ++k) train_set.push_back(random_example(3, rng, false));
  for (int k = 0; k < 20; ++k) validation.push_back(random_example(3, rng, false));
  Network<double> net(tiny(3, false, 3));
  TrainConfig cfg;
  cfg.batch_size = 10;
  cfg.max_epochs = 40;
  cfg.adam.learning_rate = 0.02;
  const TrainReport report = train(net, std::span<const Example>(train_set), std::span<const Example>(validation), cfg);
  REQUIRE(report.validation_loss.size() == static_cast<size_t>(report.epochs_run));
  REQUIRE(report.returned_epoch >= 1);
  const double kept = report.validation_loss[report.returned_epoch - 1];
  CHECK(batch_loss(net, std::span<const Example>(validation), cfg.loss) == doctest::Approx(kept).epsilon(1e-9));
  if (report.stopped_early) CHECK(report.epochs_run - report.returned_epoch == cfg.rise_limit);
  for (size_t i = 0; i < net.params().size(); ++i) {
    if (net.is_masked_tap(i)) CHECK(net.params()[i] == 0.0);
  }
}

TEST_CASE("a student network learns a teacher's policy") {
  NetworkConfig c;
  c.board_size = 4;
  c.filters = 8;
  c.layers = {{3, true}, {3, true}, {1, false}};
  c.seed = 100;
  const Network<double> teacher(c);
  Rng rng(12);
  std::vector<Example> data;
  double entropy = 0;
  for (int k = 0; k < 300; ++k) {
    Example e;
    e.position = random_position(4, rng);
    const Output o = teacher.forward(encode(e.position), e.position.legal_mask(), e.position.to_move(), 1.0);
    e.target = o.policy;
    for (double p : o.policy) entropy -= p > 0 ? p * std::log(p) : 0.0;
    data.push_back(std::move(e));
  }
  entropy /= data.size();
  c.seed = 200;
  Network<double> student(c);
  const LossConfig loss{PolicyTarget::tpt, false};
  const double before = batch_loss(student, std::span<const Example>(data), loss) - entropy;
  TrainConfig cfg;
  cfg.batch_size = 25;
  cfg.max_epochs = 30;
  cfg.adam.learning_rate = 0.01;
  train(student, std::span<const Example>(data), std::span<const Example>(), cfg);
  const double after = batch_loss(student, std::span<const Example>(data), loss) - entropy;
  CHECK(after < 0.25 * before);
}

TEST_CASE("initialisation is seeded") {
  const Network<float> a(tiny(4, true, 9)), b(tiny(4, true, 9)), c(tiny(4, true, 10));
  CHECK(std::equal(a.params().begin(), a.params().end(), b.params().begin()));
  CHECK_FALSE(std::equal(a.params().begin(), a.params().end(), c.params().begin()));
}

TEST_CASE("checkpoints round-trip exactly") {
  Network<float> net(NetworkConfig::desk(5));
  const std::string bytes = serialize_checkpoint(net);
  const Network<float> back = deserialize_checkpoint(bytes);
  CHECK(back.config().same_shape(net.config()));
  CHECK(std::equal(net.params().begin(), net.params().end(), back.params().begin()));
  CHECK(serialize_checkpoint(back) == bytes);

  const Board b = Board(5).play({2, 2});
  const Output o1 = net.forward(encode(b), b.legal_mask(), b.to_move(), 1.0);
  const Output o2 = back.forward(encode(b), b.legal_mask(), b.to_move(), 1.0);
  CHECK(o1.policy == o2.policy);

  const auto path = std::filesystem::temp_directory_path() / "hexit_ckpt_test.bin";
  save_checkpoint(net, path);
  const Network<float> loaded = load_checkpoint(path);
  CHECK(std::equal(net.params().begin(), net.params().end(), loaded.params().begin()));
  std::filesystem::remove(path);

  std::string bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS(deserialize_checkpoint(bad));
  CHECK_THROWS(deserialize_checkpoint(bytes.substr(0, bytes.size() - 3)));
  CHECK_THROWS(deserialize_checkpoint(bytes + "x"));
  CHECK_THROWS(load_checkpoint(path));
}

TEST_CASE("double parameters rounded to f32 survive a checkpoint unchanged") {
  Network<double> net(tiny(3, true, 4));
  net.round_to_f32();
  const Network<float> back = deserialize_checkpoint(serialize_checkpoint(net));
  for (size_t i = 0; i < net.params().size(); ++i) CHECK(static_cast<double>(back.params()[i]) == net.params()[i]);
}

TEST_CASE("non-finite activations name the layer") {
  Network<double> net(tiny(3, false));
  net.tensor("conv2.bias")[0] = std::numeric_limits<double>::quiet_NaN();
  const Board b(3);
  try {
    net.forward(encode(b), b.legal_mask(), b.to_move(), 1.0);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(e.layer() == 2);
  }
}

TEST_CASE("network evaluations do not depend on batch composition") {
  auto net = std::make_shared<const Network<float>>(NetworkConfig::desk(5));
  NetworkEvaluator ev(net);
  Rng rng(6);
  std::vector<search::EvalRequest> batch;
  for (int k = 0; k < 6; ++k) batch.push_back(search::make_request(random_position(5, rng), 0.1));
  const auto together = ev.evaluate(batch);
  for (size_t k = 0; k < batch.size(); ++k) {
    const auto alone = ev.evaluate(std::span(&batch[k], 1));
    CHECK(alone[0].policy == together[k].policy);
  }
  CHECK(ev.evaluations() == 12);
}

TEST_CASE("variance calibration normalises pre-activations") {
  NetworkConfig c = NetworkConfig::desk(5);
  c.filters = 8;
  Network<double> net(c);
  Rng rng(17);
  std::vector<EncodedState> batch;
  for (int k = 0; k < 40; ++k) batch.push_back(encode(random_position(5, rng)));
  net.calibrate_variance(batch);
  for (size_t l = 0; l < c.layers.size(); ++l) {
    double sum = 0, sum_sq = 0, count = 0;
    for (const auto& x : batch) {
      const auto pre = net.conv_preactivations(x);
      for (double v : pre[l]) {
        sum += v;
        sum_sq += v * v;
        ++count;
      }
    }
    const double mean = sum / count;
    CHECK(sum_sq / count - mean * mean == doctest::Approx(1.0).epsilon(1e-6));
  }
}
