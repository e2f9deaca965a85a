/* Image smoothing only: a single GPU-friendly stencil loop. */

#define DIM 128

static void blur(float pix[DIM][DIM], float out[DIM][DIM],
                 float weight[3][3], int height, int width)
{
    int row;
    int col;
    int dr;
    int dc;
    float sum;

    for (row = 1; row < height - 1; row = row + 1) {
        for (col = 1; col < width - 1; col = col + 1) {
            sum = 0;
            for (dr = -1; dr <= 1; dr = dr + 1) {
                for (dc = -1; dc <= 1; dc = dc + 1) {
                    sum = sum + pix[row + dr][col + dc] * weight[dr + 1][dc + 1];
                }
            }
            out[row][col] = sum;
        }
    }
}

int main(void)
{
    float pix[DIM][DIM];
    float out[DIM][DIM];
    float weight[3][3];

    blur(pix, out, weight, DIM, DIM);
    return 0;
}
