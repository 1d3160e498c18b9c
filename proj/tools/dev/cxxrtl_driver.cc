#include "pwm.cc"
#include <cstdio>
#include <cstdlib>
int main(int argc, char** argv) {
    int duties[4] = {0, 64, 128, 192};
    bool sweep = argc < 2;
    int fixed = sweep ? 0 : atoi(argv[1]);
    int cycles = argc > 2 ? atoi(argv[2]) : 2048;
    cxxrtl_design::p_pwm__top top;
    top.p_en.set<unsigned>(1);
    for (int t = 0; t < cycles; ++t) {
        int d = sweep ? duties[(t / 512) % 4] : fixed;
        top.p_duty.set<unsigned>(d);
        top.p_rstn.set<unsigned>(t < 4 ? 0 : 1);
        top.p_clk.set<unsigned>(0); top.step();
        top.p_clk.set<unsigned>(1); top.step();
        printf("%d,%u,%u,%u,%u,%u\n", t, top.p_pwm.get<unsigned>(), top.p_pwm__n.get<unsigned>(),
               top.p_u__cnt1_2e_count.get<unsigned>(), top.p_u__cnt2_2e_count.get<unsigned>(), top.p_u__cnt3_2e_count.get<unsigned>());
    }
}
