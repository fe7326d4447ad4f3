#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "raftmig/rng.hpp"

namespace raftmig {

enum class Activation { None, Rectifier, ScaledSigmoid };

struct LayerSpec {
    int width = 0;
    Activation activation = Activation::None; // ignored for the input layer
    double act_scale = 1.0;                   // ScaledSigmoid range (0, act_scale)
};

// One fully connected network. weights[l] is (widths[l+1] x widths[l]),
// row-major; biases[l] has widths[l+1] entries. activations[l] applies to
// layer l+1's pre-activations.
struct NetParams {
    std::vector<int> widths;
    std::vector<Activation> activations;
    std::vector<double> act_scales;
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;

    int input_width() const { return widths.front(); }
    int output_width() const { return widths.back(); }
    int layer_count() const { return static_cast<int>(weights.size()); }
};

// Pre- and post-activation values of one forward pass, reused by backward.
struct ForwardTrace {
    std::vector<double> input;
    std::vector<std::vector<double>> pre;  // per layer
    std::vector<std::vector<double>> post; // per layer
};

// Parameter gradients plus the gradient with respect to the network input.
struct GradientSet {
    std::vector<std::vector<double>> dweights;
    std::vector<std::vector<double>> dbiases;
    std::vector<double> input_grad;
};

enum class StepDirection { Descent, Ascent };

// Weights i.i.d. Gaussian(0, scale^2 / fan_in), biases zero.
NetParams init_params(const std::vector<LayerSpec>& specs, Rng& rng, double scale = 1.0);

// Forward pass; the trace is resized as needed and can be reused across calls.
// Returns a reference to the stored output (trace.post.back()).
const std::vector<double>& forward(const NetParams& params, const std::vector<double>& input,
                                   ForwardTrace& trace);
std::vector<double> forward(const NetParams& params, const std::vector<double>& input);

// Exact reverse-mode gradients of (output_grad . output) with respect to every
// parameter and the input. The trace must come from a forward call on params.
void backward(const NetParams& params, const ForwardTrace& trace,
              const std::vector<double>& output_grad, GradientSet& out);
GradientSet backward(const NetParams& params, const ForwardTrace& trace,
                     const std::vector<double>& output_grad);

// Same reverse sweep but only the input gradient is produced (used where a
// network is differentiated through, not trained).
void backward_input_only(const NetParams& params, const ForwardTrace& trace,
                         const std::vector<double>& output_grad, std::vector<double>& input_grad);

void resize_gradients(const NetParams& params, GradientSet& grads);
void zero_gradients(GradientSet& grads);
// accum += addend * factor, elementwise over all parameter gradients.
void accumulate_gradients(GradientSet& accum, const GradientSet& addend, double factor);

void sgd_step(NetParams& params, const GradientSet& grads, double lr, StepDirection direction);

// Adam optimizer state (enabled by configuration; plain SGD is the default).
struct AdamState {
    std::vector<std::vector<double>> m_w, v_w, m_b, v_b;
    std::int64_t step_count = 0;
};

AdamState make_adam_state(const NetParams& params);
void adam_step(NetParams& params, const GradientSet& grads, AdamState& state, double lr,
               double beta1, double beta2, double epsilon, StepDirection direction);

// Max relative error between backward's gradients and central finite
// differences of a fixed-projection scalar of the output, over every weight,
// bias, and input coordinate.
double finite_diff_check(const NetParams& params, const std::vector<double>& input,
                         double epsilon);

// Versioned textual parameter container (round-trips doubles exactly via 17
// significant digits).
void write_net(std::ostream& out, const std::string& name, const NetParams& params);
NetParams read_net(std::istream& in, const std::string& expected_name);

} // namespace raftmig
