#include "raftmig/nn.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>

#include "raftmig/error.hpp"

namespace raftmig {

namespace {

double stable_sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double activation_derivative(Activation act, double scale, double pre, double post) {
    switch (act) {
        case Activation::None: return 1.0;
        case Activation::Rectifier: return pre > 0.0 ? 1.0 : 0.0;
        case Activation::ScaledSigmoid: return post * (1.0 - post / scale);
    }
    return 1.0;
}

void check_trace(const NetParams& params, const ForwardTrace& trace) {
    const auto layers = static_cast<std::size_t>(params.layer_count());
    if (trace.pre.size() != layers || trace.post.size() != layers ||
        static_cast<int>(trace.input.size()) != params.input_width())
        fail("stale-trace", "trace does not match the network shape");
    for (std::size_t l = 0; l < layers; ++l) {
        const auto width = static_cast<std::size_t>(params.widths[l + 1]);
        if (trace.pre[l].size() != width || trace.post[l].size() != width)
            fail("stale-trace", "trace layer width does not match the network shape");
    }
}

const char* activation_name(Activation act) {
    switch (act) {
        case Activation::None: return "none";
        case Activation::Rectifier: return "relu";
        case Activation::ScaledSigmoid: return "ksigmoid";
    }
    return "none";
}

Activation activation_from_name(const std::string& name) {
    if (name == "none") return Activation::None;
    if (name == "relu") return Activation::Rectifier;
    if (name == "ksigmoid") return Activation::ScaledSigmoid;
    fail("parse-error", "unknown activation '" + name + "'");
}

void write_doubles(std::ostream& out, const std::vector<double>& values) {
    char buf[40];
    for (double v : values) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << ' ' << buf;
    }
    out << '\n';
}

void read_doubles(std::istream& in, std::vector<double>& values, std::size_t count) {
    values.resize(count);
    for (std::size_t i = 0; i < count; ++i)
        if (!(in >> values[i])) fail("parse-error", "truncated parameter payload");
}

} // namespace

NetParams init_params(const std::vector<LayerSpec>& specs, Rng& rng, double scale) {
    if (specs.size() < 2) fail("validation-error", "a network needs at least two layers");
    NetParams params;
    for (const LayerSpec& spec : specs) {
        if (spec.width < 1) fail("validation-error", "layer widths must be >= 1");
        params.widths.push_back(spec.width);
    }
    for (std::size_t l = 1; l < specs.size(); ++l) {
        params.activations.push_back(specs[l].activation);
        params.act_scales.push_back(specs[l].act_scale);
        if (specs[l].activation == Activation::ScaledSigmoid && !(specs[l].act_scale > 0.0))
            fail("validation-error", "scaled-sigmoid needs a positive scale");
    }
    for (std::size_t l = 0; l + 1 < params.widths.size(); ++l) {
        const auto fan_in = static_cast<std::size_t>(params.widths[l]);
        const auto fan_out = static_cast<std::size_t>(params.widths[l + 1]);
        const double stddev = scale / std::sqrt(static_cast<double>(fan_in));
        std::vector<double> w(fan_out * fan_in);
        for (double& x : w) x = scale == 0.0 ? 0.0 : rng.gaussian(0.0, stddev);
        params.weights.push_back(std::move(w));
        params.biases.emplace_back(fan_out, 0.0);
    }
    return params;
}

const std::vector<double>& forward(const NetParams& params, const std::vector<double>& input,
                                   ForwardTrace& trace) {
    if (static_cast<int>(input.size()) != params.input_width())
        fail("dimension-mismatch", "input width does not match the network");
    const auto layers = static_cast<std::size_t>(params.layer_count());
    trace.input = input;
    trace.pre.resize(layers);
    trace.post.resize(layers);

    const std::vector<double>* activation = &trace.input;
    for (std::size_t l = 0; l < layers; ++l) {
        const auto in_width = static_cast<std::size_t>(params.widths[l]);
        const auto out_width = static_cast<std::size_t>(params.widths[l + 1]);
        trace.pre[l].resize(out_width);
        trace.post[l].resize(out_width);
        const std::vector<double>& w = params.weights[l];
        const std::vector<double>& b = params.biases[l];
        for (std::size_t j = 0; j < out_width; ++j) {
            double z = b[j];
            const double* row = w.data() + j * in_width;
            const double* a = activation->data();
            for (std::size_t i = 0; i < in_width; ++i) z += row[i] * a[i];
            trace.pre[l][j] = z;
            switch (params.activations[l]) {
                case Activation::None: trace.post[l][j] = z; break;
                case Activation::Rectifier: trace.post[l][j] = z > 0.0 ? z : 0.0; break;
                case Activation::ScaledSigmoid:
                    trace.post[l][j] = params.act_scales[l] * stable_sigmoid(z);
                    break;
            }
        }
        activation = &trace.post[l];
    }
    return trace.post.back();
}

std::vector<double> forward(const NetParams& params, const std::vector<double>& input) {
    ForwardTrace trace;
    return forward(params, input, trace);
}

void resize_gradients(const NetParams& params, GradientSet& grads) {
    const auto layers = static_cast<std::size_t>(params.layer_count());
    grads.dweights.resize(layers);
    grads.dbiases.resize(layers);
    for (std::size_t l = 0; l < layers; ++l) {
        grads.dweights[l].resize(params.weights[l].size());
        grads.dbiases[l].resize(params.biases[l].size());
    }
    grads.input_grad.resize(static_cast<std::size_t>(params.input_width()));
}

void zero_gradients(GradientSet& grads) {
    for (auto& w : grads.dweights) w.assign(w.size(), 0.0);
    for (auto& b : grads.dbiases) b.assign(b.size(), 0.0);
    grads.input_grad.assign(grads.input_grad.size(), 0.0);
}

void accumulate_gradients(GradientSet& accum, const GradientSet& addend, double factor) {
    for (std::size_t l = 0; l < accum.dweights.size(); ++l) {
        const std::vector<double>& src_w = addend.dweights[l];
        std::vector<double>& dst_w = accum.dweights[l];
        for (std::size_t i = 0; i < dst_w.size(); ++i) dst_w[i] += factor * src_w[i];
        const std::vector<double>& src_b = addend.dbiases[l];
        std::vector<double>& dst_b = accum.dbiases[l];
        for (std::size_t i = 0; i < dst_b.size(); ++i) dst_b[i] += factor * src_b[i];
    }
}

void backward(const NetParams& params, const ForwardTrace& trace,
              const std::vector<double>& output_grad, GradientSet& out) {
    check_trace(params, trace);
    if (static_cast<int>(output_grad.size()) != params.output_width())
        fail("dimension-mismatch", "output gradient width does not match the network");
    resize_gradients(params, out);

    const int layers = params.layer_count();
    std::vector<double> delta = output_grad;
    for (int l = layers - 1; l >= 0; --l) {
        const auto in_width = static_cast<std::size_t>(params.widths[l]);
        const auto out_width = static_cast<std::size_t>(params.widths[l + 1]);
        const std::vector<double>& upstream =
            l == 0 ? trace.input : trace.post[static_cast<std::size_t>(l - 1)];

        for (std::size_t j = 0; j < out_width; ++j)
            delta[j] *= activation_derivative(params.activations[static_cast<std::size_t>(l)],
                                              params.act_scales[static_cast<std::size_t>(l)],
                                              trace.pre[static_cast<std::size_t>(l)][j],
                                              trace.post[static_cast<std::size_t>(l)][j]);

        std::vector<double>& dw = out.dweights[static_cast<std::size_t>(l)];
        for (std::size_t j = 0; j < out_width; ++j) {
            const double dj = delta[j];
            double* row = dw.data() + j * in_width;
            const double* a = upstream.data();
            for (std::size_t i = 0; i < in_width; ++i) row[i] = dj * a[i];
        }
        out.dbiases[static_cast<std::size_t>(l)] = delta;

        std::vector<double> prev(in_width, 0.0);
        const std::vector<double>& w = params.weights[static_cast<std::size_t>(l)];
        for (std::size_t j = 0; j < out_width; ++j) {
            const double dj = delta[j];
            const double* row = w.data() + j * in_width;
            for (std::size_t i = 0; i < in_width; ++i) prev[i] += row[i] * dj;
        }
        delta = std::move(prev);
    }
    out.input_grad = std::move(delta);
}

GradientSet backward(const NetParams& params, const ForwardTrace& trace,
                     const std::vector<double>& output_grad) {
    GradientSet out;
    backward(params, trace, output_grad, out);
    return out;
}

void backward_input_only(const NetParams& params, const ForwardTrace& trace,
                         const std::vector<double>& output_grad,
                         std::vector<double>& input_grad) {
    check_trace(params, trace);
    if (static_cast<int>(output_grad.size()) != params.output_width())
        fail("dimension-mismatch", "output gradient width does not match the network");
    std::vector<double> delta = output_grad;
    for (int l = params.layer_count() - 1; l >= 0; --l) {
        const auto in_width = static_cast<std::size_t>(params.widths[l]);
        const auto out_width = static_cast<std::size_t>(params.widths[l + 1]);
        for (std::size_t j = 0; j < out_width; ++j)
            delta[j] *= activation_derivative(params.activations[static_cast<std::size_t>(l)],
                                              params.act_scales[static_cast<std::size_t>(l)],
                                              trace.pre[static_cast<std::size_t>(l)][j],
                                              trace.post[static_cast<std::size_t>(l)][j]);
        std::vector<double> prev(in_width, 0.0);
        const std::vector<double>& w = params.weights[static_cast<std::size_t>(l)];
        for (std::size_t j = 0; j < out_width; ++j) {
            const double dj = delta[j];
            const double* row = w.data() + j * in_width;
            for (std::size_t i = 0; i < in_width; ++i) prev[i] += row[i] * dj;
        }
        delta = std::move(prev);
    }
    input_grad = std::move(delta);
}

void sgd_step(NetParams& params, const GradientSet& grads, double lr, StepDirection direction) {
    if (grads.dweights.size() != params.weights.size())
        fail("shape-mismatch", "gradient shapes do not match the network");
    const double sign = direction == StepDirection::Descent ? -1.0 : 1.0;
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        if (grads.dweights[l].size() != params.weights[l].size() ||
            grads.dbiases[l].size() != params.biases[l].size())
            fail("shape-mismatch", "gradient shapes do not match the network");
        std::vector<double>& w = params.weights[l];
        const std::vector<double>& dw = grads.dweights[l];
        for (std::size_t i = 0; i < w.size(); ++i) w[i] += sign * lr * dw[i];
        std::vector<double>& b = params.biases[l];
        const std::vector<double>& db = grads.dbiases[l];
        for (std::size_t i = 0; i < b.size(); ++i) b[i] += sign * lr * db[i];
    }
}

AdamState make_adam_state(const NetParams& params) {
    AdamState state;
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        state.m_w.emplace_back(params.weights[l].size(), 0.0);
        state.v_w.emplace_back(params.weights[l].size(), 0.0);
        state.m_b.emplace_back(params.biases[l].size(), 0.0);
        state.v_b.emplace_back(params.biases[l].size(), 0.0);
    }
    return state;
}

void adam_step(NetParams& params, const GradientSet& grads, AdamState& state, double lr,
               double beta1, double beta2, double epsilon, StepDirection direction) {
    if (state.m_w.size() != params.weights.size())
        fail("shape-mismatch", "optimizer state does not match the network");
    ++state.step_count;
    const double t = static_cast<double>(state.step_count);
    const double corr1 = 1.0 - std::pow(beta1, t);
    const double corr2 = 1.0 - std::pow(beta2, t);
    const double sign = direction == StepDirection::Descent ? -1.0 : 1.0;
    auto update = [&](std::vector<double>& p, const std::vector<double>& g,
                      std::vector<double>& m, std::vector<double>& v) {
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
            v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
            const double mhat = m[i] / corr1;
            const double vhat = v[i] / corr2;
            p[i] += sign * lr * mhat / (std::sqrt(vhat) + epsilon);
        }
    };
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        update(params.weights[l], grads.dweights[l], state.m_w[l], state.v_w[l]);
        update(params.biases[l], grads.dbiases[l], state.m_b[l], state.v_b[l]);
    }
}

double finite_diff_check(const NetParams& params, const std::vector<double>& input,
                         double epsilon) {
    if (!(epsilon > 0.0)) fail("validation-error", "epsilon must be positive");

    // Fixed projection so the checked quantity is a scalar with a dense
    // dependence on every output coordinate.
    std::vector<double> projection(static_cast<std::size_t>(params.output_width()));
    for (std::size_t j = 0; j < projection.size(); ++j)
        projection[j] = 1.0 + 0.5 * std::sin(1.7 * static_cast<double>(j) + 0.3);

    auto eval = [&](const NetParams& p, const std::vector<double>& x) {
        const std::vector<double> out = forward(p, x);
        double f = 0.0;
        for (std::size_t j = 0; j < out.size(); ++j) f += projection[j] * out[j];
        return f;
    };

    ForwardTrace trace;
    forward(params, input, trace);
    GradientSet analytic;
    backward(params, trace, projection, analytic);

    double max_rel = 0.0;
    auto record = [&](double a, double n) {
        const double rel = std::fabs(a - n) / std::max({std::fabs(a), std::fabs(n), 1e-6});
        max_rel = std::max(max_rel, rel);
    };

    NetParams probe = params;
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        for (std::size_t i = 0; i < params.weights[l].size(); ++i) {
            const double save = probe.weights[l][i];
            probe.weights[l][i] = save + epsilon;
            const double up = eval(probe, input);
            probe.weights[l][i] = save - epsilon;
            const double down = eval(probe, input);
            probe.weights[l][i] = save;
            record(analytic.dweights[l][i], (up - down) / (2.0 * epsilon));
        }
        for (std::size_t i = 0; i < params.biases[l].size(); ++i) {
            const double save = probe.biases[l][i];
            probe.biases[l][i] = save + epsilon;
            const double up = eval(probe, input);
            probe.biases[l][i] = save - epsilon;
            const double down = eval(probe, input);
            probe.biases[l][i] = save;
            record(analytic.dbiases[l][i], (up - down) / (2.0 * epsilon));
        }
    }
    std::vector<double> x = input;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double save = x[i];
        x[i] = save + epsilon;
        const double up = eval(params, x);
        x[i] = save - epsilon;
        const double down = eval(params, x);
        x[i] = save;
        record(analytic.input_grad[i], (up - down) / (2.0 * epsilon));
    }
    return max_rel;
}

void write_net(std::ostream& out, const std::string& name, const NetParams& params) {
    out << "net " << name << '\n';
    out << "widths " << params.widths.size();
    for (int w : params.widths) out << ' ' << w;
    out << '\n';
    out << "activations";
    for (std::size_t l = 0; l < params.activations.size(); ++l)
        out << ' ' << activation_name(params.activations[l]);
    out << '\n';
    out << "scales";
    write_doubles(out, params.act_scales);
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        out << "weights " << l;
        write_doubles(out, params.weights[l]);
        out << "biases " << l;
        write_doubles(out, params.biases[l]);
    }
    out << "endnet\n";
}

NetParams read_net(std::istream& in, const std::string& expected_name) {
    std::string token;
    if (!(in >> token) || token != "net") fail("parse-error", "expected 'net' header");
    std::string name;
    if (!(in >> name)) fail("parse-error", "missing network name");
    if (!expected_name.empty() && name != expected_name)
        fail("parse-error", "expected network '" + expected_name + "', found '" + name + "'");

    NetParams params;
    std::size_t width_count = 0;
    if (!(in >> token) || token != "widths" || !(in >> width_count) || width_count < 2)
        fail("parse-error", "malformed widths record");
    params.widths.resize(width_count);
    for (auto& w : params.widths)
        if (!(in >> w) || w < 1) fail("parse-error", "malformed widths record");

    if (!(in >> token) || token != "activations") fail("parse-error", "missing activations");
    for (std::size_t l = 0; l + 1 < width_count; ++l) {
        if (!(in >> token)) fail("parse-error", "truncated activations");
        params.activations.push_back(activation_from_name(token));
    }
    if (!(in >> token) || token != "scales") fail("parse-error", "missing scales");
    read_doubles(in, params.act_scales, width_count - 1);

    for (std::size_t l = 0; l + 1 < width_count; ++l) {
        std::size_t index = 0;
        if (!(in >> token) || token != "weights" || !(in >> index) || index != l)
            fail("parse-error", "malformed weights record");
        std::vector<double> w;
        read_doubles(in, w,
                     static_cast<std::size_t>(params.widths[l]) *
                         static_cast<std::size_t>(params.widths[l + 1]));
        params.weights.push_back(std::move(w));
        if (!(in >> token) || token != "biases" || !(in >> index) || index != l)
            fail("parse-error", "malformed biases record");
        std::vector<double> b;
        read_doubles(in, b, static_cast<std::size_t>(params.widths[l + 1]));
        params.biases.push_back(std::move(b));
    }
    if (!(in >> token) || token != "endnet") fail("parse-error", "missing endnet terminator");
    return params;
}

} // namespace raftmig
