// 8-bit quantized fully connected layer with ReLU and requantization.
void dense_relu(signed char* x, signed char* w, int* bias, signed char* y, int nin, int nout) {
    for (int j = 0; j < nout; j++) {
        int acc = bias[j];
        for (int i = 0; i < nin; i++) {
            acc += x[i] * w[j * nin + i];
        }
        int q = acc > 0 ? acc >> 6 : 0;
        y[j] = (signed char)(q > 127 ? 127 : q);
    }
}
