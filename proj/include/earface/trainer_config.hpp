#pragma once

#include <cstdint>

#include "earface/losses.hpp"

namespace earface {

struct TrainConfig {
    int epochs = 25;
    int max_steps = 0;  // optional cap; 0 disables
    int batch_size = 1;
    double learning_rate = 2e-4;
    double beta1 = 0.5;
    double beta2 = 0.999;
    LossWeights weights;
    uint64_t seed = 0;
    int checkpoint_every = 500;

    void validate() const {
        if (epochs < 1) throw Error("TrainConfig: epochs must be >= 1");
        if (batch_size < 1) throw Error("TrainConfig: batch_size must be >= 1");
        if (learning_rate <= 0) throw Error("TrainConfig: learning_rate must be positive");
        if (checkpoint_every < 1) throw Error("TrainConfig: checkpoint_every must be >= 1");
        if (max_steps < 0) throw Error("TrainConfig: max_steps must be >= 0");
        weights.validate();
    }
};

}  // namespace earface
