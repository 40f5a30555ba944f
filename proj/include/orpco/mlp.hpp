#ifndef ORPCO_MLP_HPP
#define ORPCO_MLP_HPP

#include "orpco/rng.hpp"

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include <string>
#include <vector>

namespace orpco {

enum class Activation { relu, tanh, softplus, identity };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

struct MlpSpec {
    int input_dim = 0;
    std::vector<int> hidden_dims;
    int output_dim = 0;
    Activation hidden_act = Activation::relu;
    Activation output_act = Activation::identity;

    void validate() const;
    int n_layers() const { return static_cast<int>(hidden_dims.size()) + 1; }
    std::vector<int> layer_widths() const; // [input, hidden..., output]
    long param_count() const;              // sum of W and b sizes

    nlohmann::json to_json() const;
    static MlpSpec from_json(const nlohmann::json& j);
};

/// Fully connected network over a flat parameter vector. Batches are
/// row-major: one sample per row. Forward on frozen parameters is pure.
class Mlp {
public:
    Mlp() = default;
    explicit Mlp(MlpSpec spec); // zero-initialized parameters

    const MlpSpec& spec() const { return spec_; }
    Eigen::VectorXd& params() { return params_; }
    const Eigen::VectorXd& params() const { return params_; }

    void init_uniform_fanin(Rng& rng); // U(-1/sqrt(fan_in), 1/sqrt(fan_in))

    /// Mutable view of one layer's bias vector (0-based layer index).
    Eigen::Map<Eigen::VectorXd> layer_bias(int layer);

    Eigen::MatrixXd forward(const Eigen::MatrixXd& input) const;

    struct Cache {
        std::vector<Eigen::MatrixXd> pre;  // pre-activations per layer
        std::vector<Eigen::MatrixXd> post; // post[0] = input, post[l] = activations
    };
    Eigen::MatrixXd forward_cached(const Eigen::MatrixXd& input, Cache& cache) const;

    /// Reverse pass: given dLoss/dOutput, accumulates dLoss/dParams into
    /// `grad` (same length as params) and returns dLoss/dInput.
    Eigen::MatrixXd backward(const Cache& cache, const Eigen::MatrixXd& grad_output,
                             Eigen::VectorXd& grad) const;

    /// Gradient of the scalar output w.r.t. each input row (output_dim must be 1).
    Eigen::MatrixXd input_gradient(const Eigen::MatrixXd& input) const;

    /// Forward-over-reverse pass for penalty terms built on input gradients.
    /// For each batch row b with tangent row t_b, computes
    ///   phi_b = t_b . d(output_b)/d(input_b)
    /// and accumulates d(sum_b coeff_b * phi_b)/dParams into `grad`
    /// (second-order in the network, exact for smooth activations; for relu
    /// the zero-measure kink set is treated as locally constant).
    /// Returns the vector of phi_b. output_dim must be 1.
    Eigen::VectorXd directional_derivative_param_grad(const Eigen::MatrixXd& input,
                                                      const Eigen::MatrixXd& tangent,
                                                      const Eigen::VectorXd& coeff,
                                                      Eigen::VectorXd& grad) const;

    nlohmann::json checkpoint() const; // spec manifest + flat params, bit-exact
    static Mlp restore(const nlohmann::json& j);

private:
    MlpSpec spec_;
    Eigen::VectorXd params_;
    std::vector<long> w_offsets_, b_offsets_;
    std::vector<int> widths_;

    Eigen::Map<const Eigen::MatrixXd> weight(int layer) const;
    Eigen::Map<const Eigen::VectorXd> bias(int layer) const;
    Eigen::Map<Eigen::MatrixXd> weight_of(Eigen::VectorXd& v, int layer) const;
    Eigen::Map<Eigen::VectorXd> bias_of(Eigen::VectorXd& v, int layer) const;
    void index_layers();
};

} // namespace orpco

#endif
