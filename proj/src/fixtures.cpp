#include "opinion_loom/fixtures.hpp"

namespace opinion_loom::fixtures {

namespace {

// Agent-major: one row per agent, one column per round (20 rounds).
constexpr double k_dg_observed[5][20] = {
    {0.978868, 0.182642, 0.384071, 0.366558, 0.138049, 0.246562, 0.100415, 0.254914, 0.098878, 0.232076, 0.207233, 0.186789, 0.214647, 0.16443, 0.076668, 0.156157, 0.171572, 0.12822, 0.106754, 0.125504},
    {0.967102, 0.529602, 0.230586, 0.338536, 0.225054, 0.316719, 0.35758, 0.242787, 0.202072, 0.145493, 0.143321, 0.082686, 0.15535, 0.102249, 0.179173, 0.079576, 0.083189, 0.07277, 0.085203, 0.096694},
    {0.426788, 0.309989, 0.382067, 0.149812, 0.223144, 0.153431, 0.266111, 0.177883, 0.338934, 0.218452, 0.119205, 0.119205, 0.177749, 0.177749, 0.106484, 0.116981, 0.144364, 0.076263, 0.080931, 0.101065},
    {0.059507, 0.341811, 0.228012, 0.481689, 0.361759, 0.24728, 0.405574, 0.317089, 0.257235, 0.143343, 0.108536, 0.153521, 0.108563, 0.234807, 0.111816, 0.147381, 0.138169, 0.148481, 0.116252, 0.085719},
    {0.041361, 0.272979, 0.510414, 0.35242, 0.382763, 0.326018, 0.406146, 0.587101, 0.522924, 0.062991, 0.128352, 0.177294, 0.12212, 0.309878, 0.15532, 0.225186, 0.058794, 0.066287, 0.070577, 0.088748},
};

constexpr double k_dg_fitted[5][20] = {
    {0.978868, 0.337105, 0.381509, 0.394685, 0.386122, 0.387987, 0.388465, 0.388278, 0.388312, 0.388322, 0.388318, 0.388318, 0.388319, 0.388318, 0.388318, 0.388318, 0.388318, 0.388318, 0.388318, 0.388318},
    {0.967102, 0.539468, 0.38593, 0.386632, 0.38895, 0.387838, 0.388225, 0.388334, 0.388311, 0.388317, 0.388319, 0.388318, 0.388318, 0.388318, 0.388318, 0.388318, 0.388318, 0.388318, 0.388318, 0.388318},
    {0.426788, 0.373663, 0.403591, 0.385442, 0.387265, 0.388587, 0.388261, 0.388297, 0.388326, 0.388318, 0.388318, 0.388319, 0.388318, 0.388318, 0.388318, 0.388318, 0.388318, 0.388318, 0.388318, 0.388318},
    {0.059507, 0.405793, 0.367118, 0.388225, 0.390219, 0.388086, 0.388329, 0.388361, 0.388312, 0.388318, 0.388319, 0.388318, 0.388318, 0.388318, 0.388318, 0.388318, 0.388318, 0.388318, 0.388318, 0.388318},
    {0.041361, 0.341033, 0.431766, 0.389178, 0.38796, 0.389256, 0.388299, 0.388289, 0.388334, 0.388317, 0.388318, 0.388319, 0.388318, 0.388318, 0.388318, 0.388318, 0.388318, 0.388318, 0.388318, 0.388318},
};

constexpr double k_fj_observed[5][20] = {
    {0.977408, 0.395437, 0.103039, 0.096475, 0.100709, 0.061842, 0.229466, 0.138085, 0.098874, 0.121901, 0.129305, 0.11047, 0.147565, 0.126073, 0.147307, 0.137146, 0.105573, 0.15387, 0.12299, 0.126473},
    {0.970155, 0.112347, 0.451788, 0.629878, 0.131426, 0.083018, 0.154905, 0.158315, 0.117151, 0.211367, 0.314638, 0.448993, 0.361864, 0.26969, 0.326204, 0.201302, 0.13076, 0.299421, 0.220346, 0.138564},
    {0.197854, 0.239697, 0.194822, 0.158075, 0.093573, 0.093573, 0.102823, 0.136135, 0.128421, 0.128421, 0.144582, 0.155201, 0.155201, 0.119976, 0.128588, 0.168249, 0.210967, 0.125885, 0.151471, 0.136531},
    {0.07473, 0.055615, 0.194834, 0.085997, 0.099048, 0.109252, 0.109252, 0.132165, 0.132165, 0.132165, 0.132165, 0.132165, 0.132165, 0.108091, 0.113393, 0.192877, 0.192877, 0.192877, 0.186149, 0.1973},
    {0.051569, 0.520554, 0.642636, 0.228314, 0.331193, 0.322219, 0.322219, 0.562275, 0.50407, 0.492513, 0.492513, 0.460772, 0.497909, 0.497909, 0.497909, 0.31829, 0.095124, 0.095124, 0.149829, 0.149829},
};

constexpr double k_fj_fitted[5][20] = {
    {0.977408, 0.378872, 0.203354, 0.17464, 0.169535, 0.165349, 0.160419, 0.155218, 0.150039, 0.145012, 0.140204, 0.135648, 0.131358, 0.127336, 0.123577, 0.120072, 0.116809, 0.113775, 0.110955, 0.108336},
    {0.970155, 0.160689, 0.289315, 0.266614, 0.23823, 0.217688, 0.202121, 0.18957, 0.179085, 0.170115, 0.162298, 0.155382, 0.149189, 0.143593, 0.1385, 0.133842, 0.129566, 0.125628, 0.121995, 0.118638},
    {0.197854, 0.256548, 0.204829, 0.185316, 0.177425, 0.171328, 0.16533, 0.159417, 0.153706, 0.148262, 0.143118, 0.138284, 0.133758, 0.129533, 0.125596, 0.121932, 0.118526, 0.115361, 0.112423, 0.109696},
    {0.07473, 0.114165, 0.16005, 0.16694, 0.163222, 0.157914, 0.152576, 0.147407, 0.142458, 0.137761, 0.133333, 0.129178, 0.125292, 0.121667, 0.118291, 0.115151, 0.112233, 0.109522, 0.107005, 0.104669},
    {0.051569, 0.339214, 0.343619, 0.303124, 0.266511, 0.23885, 0.217895, 0.201537, 0.188381, 0.177513, 0.168319, 0.160379, 0.153405, 0.147197, 0.141611, 0.136545, 0.131923, 0.127687, 0.123791, 0.120201},
};

constexpr double k_dg_weights[5][5] = {
    {0.0, 0.0, 0.7558, 0.2442, 0.0},
    {0.2889, 0.0903, 0.3609, 0.2523, 0.0076},
    {0.0605, 0.1153, 0.4191, 0.4051, 0.0},
    {0.3327, 0.0, 0.1192, 0.3629, 0.1852},
    {0.0, 0.3152, 0.0, 0.4353, 0.2495},
};

constexpr double k_fj_weights[5][5] = {
    {0.3369, 0.0, 0.0, 0.6631, 0.0},
    {0.0, 0.0300, 0.5500, 0.0, 0.4200},
    {0.1628, 0.0, 0.2884, 0.5199, 0.0289},
    {0.0, 0.0, 0.3769, 0.5966, 0.0265},
    {0.2746, 0.0364, 0.0, 0.0, 0.6890},
};

constexpr double k_fj_susceptibility[5] = {1.0, 0.9986, 1.0, 0.8613, 1.0};

template <std::size_t Rows, std::size_t Cols>
Eigen::MatrixXd to_matrix(const double (&data)[Rows][Cols]) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(Rows), static_cast<Eigen::Index>(Cols));
  for (std::size_t i = 0; i < Rows; ++i)
    for (std::size_t j = 0; j < Cols; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = data[i][j];
  return m;
}

InfluenceMatrix renormalized(const Eigen::MatrixXd& printed) {
  Eigen::MatrixXd rows = printed;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) rows.row(i) /= rows.row(i).sum();
  return validate_influence_matrix(rows);
}

}  // namespace

std::vector<std::string> published_agent_ids() {
  return {"deepseek_v3", "gpt_4o_mini", "qwen2_5", "mistral_large", "llama_3_3"};
}

OpinionTrajectory published_dg_observed() {
  return OpinionTrajectory::from_matrix(to_matrix(k_dg_observed), published_agent_ids());
}

OpinionTrajectory published_dg_fitted() {
  return OpinionTrajectory::from_matrix(to_matrix(k_dg_fitted), published_agent_ids());
}

OpinionTrajectory published_fj_observed() {
  return OpinionTrajectory::from_matrix(to_matrix(k_fj_observed), published_agent_ids());
}

OpinionTrajectory published_fj_fitted() {
  return OpinionTrajectory::from_matrix(to_matrix(k_fj_fitted), published_agent_ids());
}

Eigen::MatrixXd published_dg_weights_printed() { return to_matrix(k_dg_weights); }
Eigen::MatrixXd published_fj_weights_printed() { return to_matrix(k_fj_weights); }

InfluenceMatrix published_dg_matrix() { return renormalized(to_matrix(k_dg_weights)); }
InfluenceMatrix published_fj_matrix() { return renormalized(to_matrix(k_fj_weights)); }

SusceptibilityProfile published_fj_susceptibility() {
  return SusceptibilityProfile(Eigen::Map<const Eigen::VectorXd>(k_fj_susceptibility, 5));
}

std::vector<Stance> published_stances() {
  return {Stance::strongly_positive, Stance::positive, Stance::neutral, Stance::negative, Stance::strongly_negative};
}

}  // namespace opinion_loom::fixtures
