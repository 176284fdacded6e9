// Allocate redundancy for a 40-sensor network and check it in simulation.

#include <iostream>

#include <lora_redundancy.hpp>

namespace lr = lora_redundancy;

int main() {
    lr::ScenarioParams sc;
    sc.sensor_count = 40;
    sc.traffic.channel_count = 3;
    sc.distances = lr::DistanceModel::uniform(44.0, 57.0);

    const lr::Constraints limits{};
    const auto alloc = lr::allocate(sc, limits, 1e-3);
    std::cout << "r_max = " << alloc.r_max << ", r* = " << alloc.r_star << ", r~ = " << alloc.r_tilde
              << ", predicted P_fail = " << alloc.profile[static_cast<std::size_t>(alloc.r_tilde)].p_fail << '\n';

    lr::SimConfig sim;
    sim.scenario = sc;
    sim.redundancy = alloc.r_tilde;
    sim.runs = 5;
    const auto rep = lr::simulate(sim);
    std::cout << "simulated frame loss = " << rep.mean_frame_loss << ", MLR = " << rep.mlr
              << ", energy per delivered measurement = " << rep.e_m_mj << " mJ\n";
}
