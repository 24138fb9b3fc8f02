# Generated by Django 5.2.6 on 2026-10-17 09:12

from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='GeneratedImageRecord',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('image_id', models.CharField(max_length=200)),
                ('source_id', models.CharField(db_index=True, max_length=128)),
                ('kind', models.CharField(choices=[('segmap', 'Segmentation map'), ('hed', 'HED boundary'), ('scribble', 'Scribble')], max_length=16)),
                ('index', models.PositiveIntegerField(help_text='Position k within the request, starting at 1')),
                ('backend', models.CharField(max_length=64)),
                ('seed', models.PositiveBigIntegerField()),
                ('prompt', models.CharField(max_length=255)),
                ('params', models.JSONField(blank=True, default=dict)),
                ('path', models.CharField(max_length=512)),
                ('sha256', models.CharField(max_length=64)),
                ('run_dir', models.CharField(max_length=512)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('updated_at', models.DateTimeField(auto_now=True)),
            ],
            options={
                'db_table': 'generated_images',
                'ordering': ('source_id', 'kind', 'index'),
                'constraints': [models.UniqueConstraint(fields=('run_dir', 'image_id'), name='unique_generated_image_per_run')],
            },
        ),
    ]
