#include <stdio.h>
#include "nisq_lab.h"

int main(void) {
    NlGraph *graph = NULL;
    NlCalibration *cal = NULL;
    NlCircuit *circuit = NULL;
    char *counts = NULL;
    size_t triples = 0, stars = 0, rings = 0;
    size_t path[4] = {0, 1, 2, 3};

    if (nl_graph_poughkeepsie(&graph) != NL_STATUS_OK) return 1;
    if (nl_graph_counts(graph, &triples, &stars, &rings) != NL_STATUS_OK) return 1;
    printf("triples: %zu, stars: %zu, six_rings: %zu\n", triples, stars, rings);

    if (nl_calibration_default(&cal) != NL_STATUS_OK) return 1;
    if (nl_circuit_cnot_chain(graph, path, 4, NL_RESET_STRATEGY_X_RESET,
                              NL_CONTROL_PREP_ONE, &circuit) != NL_STATUS_OK) {
        fprintf(stderr, "%s\n", nl_last_error_message());
        return 1;
    }
    if (nl_simulate_counts_json(circuit, cal, 1000, 1, &counts) != NL_STATUS_OK) return 1;
    printf("%s\n", counts);

    if (nl_graph_counts(NULL, &triples, &stars, &rings) != NL_STATUS_NULL_POINTER) return 1;
    printf("error: %s\n", nl_last_error_message());

    nl_string_free(counts);
    nl_circuit_free(circuit);
    nl_calibration_free(cal);
    nl_graph_free(graph);
    return 0;
}
