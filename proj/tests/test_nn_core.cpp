#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "tdn/model_io.hpp"
#include "tdn/network.hpp"
#include "tdn/rmsprop.hpp"

using namespace tdn;

namespace {

Network single_layer(std::size_t in, std::size_t out, Activation act) {
    Network net;
    net.spec = {{in, out, act}};
    DenseParams p;
    p.weight = Matrix(out, in);
    p.bias.assign(out, 0.0);
    net.params.push_back(std::move(p));
    return net;
}

} // namespace

TEST_CASE("activation identities") {
    CHECK(activate(Activation::Sigmoid, 0.0) == doctest::Approx(0.5));
    CHECK(activate(Activation::Tanh, 0.0) == 0.0);
    CHECK(activate(Activation::Gaussian, 0.0) == 0.0);
    CHECK(activate(Activation::Square, -1.7) == activate(Activation::Square, 1.7));
    CHECK(activate(Activation::Affine, 3.25) == 3.25);
}

TEST_CASE("forward: identity affine layer") {
    Network net = single_layer(2, 2, Activation::Affine);
    net.params[0].weight(0, 0) = 1.0;
    net.params[0].weight(1, 1) = 1.0;
    Matrix batch(1, 2);
    batch(0, 0) = 3.0;
    batch(0, 1) = -1.0;
    Matrix out = forward(net, batch);
    CHECK(out(0, 0) == 3.0);
    CHECK(out(0, 1) == -1.0);
}

TEST_CASE("forward: square activation sums then squares") {
    Network net = single_layer(2, 1, Activation::Square);
    net.params[0].weight(0, 0) = 1.0;
    net.params[0].weight(0, 1) = 1.0;
    Matrix batch(1, 2);
    batch(0, 0) = 1.0;
    batch(0, 1) = 2.0;
    CHECK(forward(net, batch)(0, 0) == doctest::Approx(9.0));
}

TEST_CASE("forward: shape and finiteness errors") {
    RngStream rng(7, "init");
    Network net = make_network({{3, 4, Activation::Tanh}}, rng);
    CHECK_THROWS_AS(forward(net, Matrix(2, 5)), ShapeError);
    net.spec[0].activation = Activation::Square;
    net.params[0].bias[0] = 1e308;
    net.params[0].weight(0, 0) = 1e200;
    Matrix batch(1, 3, 1.0);
    try {
        forward(net, batch);
        FAIL("expected NumericError");
    } catch (const NumericError& e) {
        CHECK(std::string(e.what()).find("layer 0") != std::string::npos);
    }
}

TEST_CASE("forward matches per-sample loop oracle on a 5->100->100->5 net") {
    RngStream rng(11, "init");
    Network net = make_network({{5, 100, Activation::Affine},
                                {100, 100, Activation::Tanh},
                                {100, 5, Activation::Affine}},
                               rng);
    Matrix batch = oracle::random_matrix(16, 5, rng);
    Matrix out = forward(net, batch);
    CHECK(out.rows() == 16);
    CHECK(out.cols() == 5);
    for (std::size_t k = 0; k < batch.rows(); ++k) {
        std::vector<double> row(batch.row(k), batch.row(k) + 5);
        const auto expect = oracle::loop_forward_row(net, row);
        for (std::size_t j = 0; j < 5; ++j)
            CHECK(std::fabs(out(k, j) - expect[j]) < 1e-12);
    }
}

TEST_CASE("batch forward equals concatenated single-row forwards") {
    RngStream rng(13, "init");
    Network net = make_network(
        {{4, 20, Activation::Sigmoid}, {20, 3, Activation::Gaussian}}, rng);
    Matrix batch = oracle::random_matrix(10, 4, rng);
    Matrix full = forward(net, batch);
    for (std::size_t k = 0; k < batch.rows(); ++k) {
        Matrix one(1, 4);
        for (std::size_t j = 0; j < 4; ++j) one(0, j) = batch(k, j);
        Matrix out = forward(net, one);
        for (std::size_t j = 0; j < 3; ++j) CHECK(std::fabs(full(k, j) - out(0, j)) < 1e-12);
    }
}

TEST_CASE("backward: affine single layer closed form") {
    Network net = single_layer(3, 2, Activation::Affine);
    RngStream rng(5, "init");
    for (double& w : net.params[0].weight.data()) w = rng.normal();
    Matrix batch = oracle::random_matrix(4, 3, rng);
    ForwardCache cache;
    forward(net, batch, &cache);
    Matrix up = oracle::random_matrix(4, 2, rng);
    NetworkGrads grads = zero_grads(net);
    Matrix input_grad = backward(net, cache, up, grads);

    // dW = up^T * batch, d input = up * W
    Matrix dw = matmul_tn(up, batch);
    for (std::size_t i = 0; i < dw.data().size(); ++i)
        CHECK(grads.weight[0].data()[i] == doctest::Approx(dw.data()[i]));
    Matrix di = matmul_nn(up, net.params[0].weight);
    for (std::size_t i = 0; i < di.data().size(); ++i)
        CHECK(input_grad.data()[i] == doctest::Approx(di.data()[i]));
}

TEST_CASE("backward: zero upstream gives zero gradients") {
    RngStream rng(17, "init");
    Network net = make_network({{3, 8, Activation::Tanh}, {8, 2, Activation::Square}}, rng);
    Matrix batch = oracle::random_matrix(5, 3, rng);
    ForwardCache cache;
    forward(net, batch, &cache);
    NetworkGrads grads = zero_grads(net);
    backward(net, cache, Matrix(5, 2), grads);
    for (const auto& w : grads.weight)
        for (double v : w.data()) CHECK(v == 0.0);
}

TEST_CASE("gradients match finite differences for every activation") {
    for (Activation act : {Activation::Affine, Activation::Square, Activation::Sigmoid,
                           Activation::Gaussian, Activation::Tanh}) {
        CAPTURE(activation_name(act));
        RngStream rng(23 + static_cast<int>(act), "init");
        Network net =
            make_network({{4, 7, act}, {7, 6, Activation::Tanh}, {6, 3, act}}, rng);
        Matrix batch = oracle::random_matrix(6, 4, rng, 0.7);

        auto loss = [&]() {
            Matrix out = forward(net, batch);
            double s = 0.0;
            for (std::size_t i = 0; i < out.data().size(); ++i)
                s += out.data()[i] * out.data()[i];
            return 0.5 * s;
        };
        ForwardCache cache;
        Matrix out = forward(net, batch, &cache);
        NetworkGrads grads = zero_grads(net);
        backward(net, cache, out, grads);  // dJ/d out = out for J = 0.5*||out||^2

        RngStream probe_rng(91, "probe");
        auto res = oracle::fd_check(oracle::param_refs(net), oracle::flat_grads(grads), loss,
                                    1e-5, 100, probe_rng);
        CHECK(res.probes == 100);
        CHECK(res.max_rel_err < 1e-5);
    }
}

TEST_CASE("rmsprop: zero gradient leaves parameters, decays accumulator") {
    RngStream rng(29, "init");
    Network net = make_network({{2, 3, Activation::Affine}}, rng);
    OptimizerState st = make_optimizer_state(net);
    st.weight_accum[0](0, 0) = 1.0;
    const auto before = net.params[0].weight.data();
    rmsprop_step(net, zero_grads(net), st, {0.001, 0.9, 1e-8});
    CHECK(net.params[0].weight.data() == before);
    CHECK(st.weight_accum[0](0, 0) == doctest::Approx(0.9));
}

TEST_CASE("rmsprop: scalar plug-in arithmetic") {
    Network net = single_layer(1, 1, Activation::Affine);
    net.params[0].weight(0, 0) = 1.0;
    NetworkGrads g = zero_grads(net);
    g.weight[0](0, 0) = 2.0;
    OptimizerState st = make_optimizer_state(net);
    rmsprop_step(net, g, st, {0.001, 0.9, 1e-8});
    CHECK(st.weight_accum[0](0, 0) == doctest::Approx(0.4));
    CHECK(net.params[0].weight(0, 0) ==
          doctest::Approx(1.0 - 0.001 * 2.0 / std::sqrt(0.4 + 1e-8)));
}

TEST_CASE("rmsprop: constant gradient step magnitude converges to learning rate") {
    Network net = single_layer(1, 1, Activation::Affine);
    net.params[0].weight(0, 0) = 50.0;
    NetworkGrads g = zero_grads(net);
    g.weight[0](0, 0) = 3.0;
    OptimizerState st = make_optimizer_state(net);
    double prev = net.params[0].weight(0, 0);
    double step = 0.0;
    for (int i = 0; i < 1000; ++i) {
        rmsprop_step(net, g, st, {0.001, 0.9, 1e-8});
        step = prev - net.params[0].weight(0, 0);
        prev = net.params[0].weight(0, 0);
    }
    CHECK(step == doctest::Approx(0.001).epsilon(1e-6));
}

TEST_CASE("freezing: parameters bitwise unchanged under optimizer steps") {
    RngStream rng(31, "init");
    Network net = make_network({{3, 5, Activation::Tanh}, {5, 2, Activation::Affine}}, rng);
    net.params[0].frozen = true;
    const auto w0 = net.params[0].weight.data();
    const auto b0 = net.params[0].bias;
    OptimizerState st = make_optimizer_state(net);
    NetworkGrads g = zero_grads(net);
    for (auto& w : g.weight)
        for (double& v : w.data()) v = 1.5;
    for (int i = 0; i < 10; ++i) rmsprop_step(net, g, st, {0.01, 0.9, 1e-8});
    CHECK(net.params[0].weight.data() == w0);
    CHECK(net.params[0].bias == b0);
    CHECK(net.params[1].weight(0, 0) != doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("serialization: bit-exact round trip, forward identical") {
    RngStream rng(37, "init");
    ModelBundle m;
    m.role = "idn";
    m.networks.emplace_back("core", make_network({{5, 40, Activation::Gaussian},
                                                  {40, 5, Activation::Affine}},
                                                 rng));
    m.networks[0].second.params[1].frozen = true;
    m.scaler = Scaler{{1.0, 2.0, 3.0, 4.0, 5.0}, {0.1, 0.2, 0.3, 0.4, 0.5}};
    m.meta["latent_dim"] = 10;

    const auto bytes = serialize_model(m);
    ModelBundle r = parse_model(bytes);
    CHECK(r.role == "idn");
    CHECK(r.networks[0].second.params[0].weight.data() ==
          m.networks[0].second.params[0].weight.data());
    CHECK(r.networks[0].second.params[1].frozen);
    CHECK(r.scaler->mean == m.scaler->mean);
    CHECK(r.meta.at("latent_dim") == 10.0);
    CHECK(serialize_model(r) == bytes);

    Matrix batch = oracle::random_matrix(4, 5, rng);
    Matrix a = forward(m.networks[0].second, batch);
    Matrix b = forward(r.networks[0].second, batch);
    CHECK(a.data() == b.data());  // 0 ulp
}

TEST_CASE("serialization: corrupted header and truncation rejected") {
    RngStream rng(41, "init");
    ModelBundle m;
    m.role = "vae";
    m.networks.emplace_back("core", make_network({{2, 2, Activation::Affine}}, rng));
    auto bytes = serialize_model(m);

    auto corrupted = bytes;
    corrupted[3] ^= 0xff;
    CHECK_THROWS_AS(parse_model(corrupted), IoError);

    auto versioned = bytes;
    versioned[8] = 99;  // format version field
    CHECK_THROWS_AS(parse_model(versioned), IoError);

    auto truncated = bytes;
    truncated.resize(truncated.size() / 2);
    CHECK_THROWS_AS(parse_model(truncated), IoError);
}

TEST_CASE("model file save/load round trip") {
    RngStream rng(43, "init");
    ModelBundle m;
    m.role = "idn";
    m.networks.emplace_back("core", make_network({{3, 3, Activation::Square}}, rng));
    const std::string path = "test_roundtrip.model";
    save_model(m, path);
    ModelBundle r = load_model(path);
    CHECK(model_checksum(r) == model_checksum(m));
    std::remove(path.c_str());
}
