/*
 * Butterfly stage with a copy-paste slip: the last line reuses tmp
 * where the twiddle product was stored in tr. Token classes still line
 * up with the pattern exactly, but slot bindings disagree.
 */

static void fft_stage(float *xr, float *xi, const float *wr,
                      const float *wi, int half)
{
    int k;
    float tr;
    float ti;
    float tmp;

    for (k = 0; k < half; k = k + 1) {
        tr = wr[k] * xr[k + half] - wi[k] * xi[k + half];
        ti = wr[k] * xi[k + half] + wi[k] * xr[k + half];
        xr[k + half] = xr[k] - tr;
        xi[k + half] = xi[k] - ti;
        xr[k] = xr[k] + tmp;
        xi[k] = xi[k] + ti;
    }
}

int main(void)
{
    float xr[64];
    float xi[64];
    float wr[32];
    float wi[32];

    fft_stage(xr, xi, wr, wi, 32);
    return 0;
}
