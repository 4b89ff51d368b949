// Trains filter banks on a small synthetic set held in memory and classifies
// held-out images with both decision rules.

#include <cstdio>

#include "mscfb/mscfb.hpp"

int main() {
    mscfb::SyntheticParams params;
    params.classes = 8;
    params.per_class = 6;
    params.width = 40;
    params.height = 44;
    params.separation = 40.0;
    params.noise = 8.0;
    params.seed = 7;
    const auto data = mscfb::generate_synthetic(params);

    const mscfb::BlockSpec spec{8, 11, params.width, params.height};
    std::vector<mscfb::SubregionSample> train, test;
    for (std::size_t i = 0; i < data.size(); ++i) {
        auto s = mscfb::preprocess(data[i].image, spec);
        s.label = data[i].label;
        s.source_id = data[i].name;
        (i % params.per_class < 2 ? train : test).push_back(std::move(s));
    }

    const mscfb::TrainingView view(train, spec);
    const auto banks = mscfb::train_all(view, mscfb::kDefaultAlpha);
    const auto gallery = mscfb::featurize(train, banks);

    std::size_t max_ok = 0, nn_ok = 0;
    for (const auto& s : test) {
        const auto f = mscfb::extract_features(s, banks);
        max_ok += banks.banks[mscfb::classify_max(f)].class_id == *s.label;
        nn_ok += mscfb::classify_cosine_nn(f, gallery).label == s.label;
    }
    std::printf("%zu banks x %zu coefficients\n", banks.class_count(), spec.total_size());
    std::printf("max rule:  %zu/%zu\n", max_ok, test.size());
    std::printf("cosine NN: %zu/%zu\n", nn_ok, test.size());
}
