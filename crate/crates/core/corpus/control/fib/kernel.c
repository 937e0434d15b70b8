// Iterative Fibonacci, wrapping at 64 bits; stores the sequence and returns F(n).
unsigned long fib(unsigned long* f, int n) {
    unsigned long a = 0;
    unsigned long b = 1;
    for (int i = 0; i < n; i++) {
        f[i] = a;
        unsigned long t = a + b;
        a = b;
        b = t;
    }
    return a;
}
