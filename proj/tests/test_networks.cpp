#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "seqshift/network.hpp"

using namespace seqshift;

namespace {

double millions(long long count) { return static_cast<double>(count) / 1e6; }

void check_within(double value, double target, double tolerance_fraction) {
  CHECK(value > target * (1 - tolerance_fraction));
  CHECK(value < target * (1 + tolerance_fraction));
}

}  // namespace

TEST_CASE("full-scale parameter counts match the published sizes within 5%") {
  // Conv-1 .3M, Conv-2 .7M, Conv-3 1.6M, Conv-4 1.6M
  check_within(millions(Net(NetworkConfig::from_name("conv1")).param_count()), 0.3, 0.05);
  check_within(millions(Net(NetworkConfig::from_name("conv2")).param_count()), 0.7, 0.05);
  check_within(millions(Net(NetworkConfig::from_name("conv3")).param_count()), 1.6, 0.05);
  check_within(millions(Net(NetworkConfig::from_name("conv4")).param_count()), 1.6, 0.05);
  // Dense-1 1.2M, Dense-2 1.7M, Dense-3 3.0M, Dense-4 6.9M
  check_within(millions(Net(NetworkConfig::from_name("dense1")).param_count()), 1.2, 0.05);
  check_within(millions(Net(NetworkConfig::from_name("dense2")).param_count()), 1.7, 0.05);
  check_within(millions(Net(NetworkConfig::from_name("dense3")).param_count()), 3.0, 0.05);
  check_within(millions(Net(NetworkConfig::from_name("dense4")).param_count()), 6.9, 0.05);
  // Res-1 7.4M, Res-2 8.2M, Res-3 10.9M, Res-4 11.0M
  check_within(millions(Net(NetworkConfig::from_name("res1")).param_count()), 7.4, 0.05);
  check_within(millions(Net(NetworkConfig::from_name("res2")).param_count()), 8.2, 0.05);
  check_within(millions(Net(NetworkConfig::from_name("res3")).param_count()), 10.9, 0.05);
  check_within(millions(Net(NetworkConfig::from_name("res4")).param_count()), 11.0, 0.05);
}

TEST_CASE("every family produces logits of the right shape") {
  for (const char* name : {"conv4", "dense2", "res2"}) {
    Net net(NetworkConfig::from_name(name, 10, 32, 8));
    net.init_params(7);
    Tensor4 x(2, 3, 32, 32);
    for (std::size_t i = 0; i < x.v.size(); ++i) x.v[i] = (i % 17) / 17.0;
    const Tensor4 logits = net.forward(x, false);
    CHECK(logits.n == 2);
    CHECK(logits.c == 10);
    CHECK(logits.h == 1);
    CHECK(logits.w == 1);
  }
}

TEST_CASE("desk-scale nets run forward and backward at 16x16") {
  for (const char* name : {"conv2", "res1", "dense1"}) {
    Net net(NetworkConfig::from_name(name, 10, 16, 4));
    net.init_params(9);
    Tensor4 x(3, 3, 16, 16);
    for (std::size_t i = 0; i < x.v.size(); ++i) x.v[i] = (i % 11) / 11.0;
    const Tensor4 logits = net.forward(x, true);
    Tensor4 dl(logits.n, logits.c, 1, 1);
    for (auto& v : dl.v) v = 0.01;
    net.zero_grads();
    net.backward(dl);
    double grad_norm = 0;
    for (Param* p : net.params())
      for (real g : p->grad) grad_norm += g * g;
    CHECK(grad_norm > 0.0);
  }
}

TEST_CASE("unknown architecture names are rejected") {
  CHECK_THROWS_AS(NetworkConfig::from_name("conv9"), std::invalid_argument);
  CHECK_THROWS_AS(NetworkConfig::from_name("vgg16"), std::invalid_argument);
}

TEST_CASE("one-layer sides are one conv plus batch norm") {
  Net net(NetworkConfig::from_name("conv2", 10, 16, 4));
  net.init_params(3);
  net.attach_sides(SideKind::kOneLayer, 4);
  // conv weight + bn gamma/beta per block
  long long expected = 0;
  const auto& cfg = net.config();
  int in_ch = 64 / 4;
  for (int size : cfg.sizes) {
    const int out = size / 4;
    expected += static_cast<long long>(out) * in_ch * 9 + 2 * out;
    in_ch = out;
  }
  CHECK(net.side_param_count(0) == expected);
}
